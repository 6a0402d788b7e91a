// tsasr/core/src/metrics.cc

// Copyright 2026  The tsasr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "tsasr/metrics.h"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "tsasr/error.h"

namespace tsasr {

double EditCounts::Wer() const {
  if (reference_length == 0) {
    return errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(errors()) / static_cast<double>(reference_length);
}

EditCounts &EditCounts::operator+=(const EditCounts &o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  reference_length += o.reference_length;
  return *this;
}

namespace {

bool AlwaysAlignable(const TimedWord &, const TimedWord &) { return true; }

std::vector<TimedWord> Untimed(std::span<const std::string> words) {
  std::vector<TimedWord> out;
  out.reserve(words.size());
  for (const std::string &w : words) out.push_back({w, 0.0, 0.0});
  return out;
}

// Cost of aligning `ref` against every prefix of `hyp`: out[b] is the
// distance to hyp[0:b].
std::vector<int> EditRow(std::span<const TimedWord> ref,
                         std::span<const TimedWord> hyp,
                         const AlignablePredicate &alignable) {
  const std::size_t n = hyp.size();
  std::vector<int> prev(n + 1), cur(n + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= n; ++j) {
      int best = std::min(prev[j], cur[j - 1]) + 1;
      if (alignable(ref[i - 1], hyp[j - 1])) {
        best = std::min(best, prev[j - 1] + (ref[i - 1].word == hyp[j - 1].word ? 0 : 1));
      }
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev;
}

struct Problem {
  std::vector<std::vector<TimedWord>> utterances;  // time-ordered
  std::vector<std::vector<TimedWord>> streams;
  AlignablePredicate alignable;
};

std::vector<TimedWord> Concatenate(const Problem &p, const std::vector<int> &assignment,
                                   int stream) {
  std::vector<TimedWord> out;
  for (std::size_t u = 0; u < p.utterances.size(); ++u) {
    if (assignment[u] == stream) {
      out.insert(out.end(), p.utterances[u].begin(), p.utterances[u].end());
    }
  }
  return out;
}

OrcReport MakeReport(const Problem &p, std::vector<int> assignment,
                     std::int64_t expected_errors) {
  OrcReport r;
  r.assignment = std::move(assignment);
  for (std::size_t c = 0; c < p.streams.size(); ++c) {
    EditCounts e = ConstrainedWordEdit(Concatenate(p, r.assignment, static_cast<int>(c)),
                                       p.streams[c], p.alignable);
    r.total += e;
    r.per_stream.push_back(e);
  }
  if (expected_errors >= 0 && r.total.errors() != expected_errors) {
    throw std::logic_error("orc: backtrace disagrees with optimal cost");
  }
  r.wer = r.total.Wer();
  return r;
}

void CheckStreams(const Problem &p) {
  if (p.streams.empty()) throw ValidationError("orc: need at least one stream");
}

OrcReport SolveOrc(const Problem &p) {
  CheckStreams(p);
  const std::size_t num_utts = p.utterances.size();
  const std::size_t k = p.streams.size();

  std::vector<std::size_t> radix(k), stride(k);
  std::size_t num_states = 1;
  for (std::size_t c = 0; c < k; ++c) {
    radix[c] = p.streams[c].size() + 1;
    stride[c] = num_states;
    num_states *= radix[c];
  }
  auto position = [&](std::size_t state, std::size_t c) {
    return (state / stride[c]) % radix[c];
  };

  // table[u][c][a][b - a] = edit(utterance u, stream c words a..b)
  std::vector<std::vector<std::vector<std::vector<int>>>> table(num_utts);
  for (std::size_t u = 0; u < num_utts; ++u) {
    table[u].resize(k);
    for (std::size_t c = 0; c < k; ++c) {
      const auto &h = p.streams[c];
      for (std::size_t a = 0; a <= h.size(); ++a) {
        table[u][c].push_back(EditRow(p.utterances[u],
                                      std::span(h).subspan(a), p.alignable));
      }
    }
  }

  // cost_to_go[u][state]: best cost of utterances u.. from stream positions.
  std::vector<std::vector<int>> cost_to_go(num_utts + 1, std::vector<int>(num_states));
  for (std::size_t s = 0; s < num_states; ++s) {
    int rest = 0;
    for (std::size_t c = 0; c < k; ++c) {
      rest += static_cast<int>(radix[c] - 1 - position(s, c));
    }
    cost_to_go[num_utts][s] = rest;
  }
  for (std::size_t u = num_utts; u-- > 0;) {
    for (std::size_t s = 0; s < num_states; ++s) {
      int best = std::numeric_limits<int>::max();
      for (std::size_t c = 0; c < k; ++c) {
        const std::size_t a = position(s, c);
        const std::vector<int> &row = table[u][c][a];
        for (std::size_t b = a; b < radix[c]; ++b) {
          const std::size_t next = s + (b - a) * stride[c];
          best = std::min(best, row[b - a] + cost_to_go[u + 1][next]);
        }
      }
      cost_to_go[u][s] = best;
    }
  }
  const int optimum = cost_to_go[0][0];

  // Forward pass keeping every optimal partial path, choosing the smallest
  // stream index at each utterance.
  std::map<std::size_t, int> frontier{{0, 0}};
  std::vector<int> assignment(num_utts, 0);
  for (std::size_t u = 0; u < num_utts; ++u) {
    for (std::size_t c = 0; c < k; ++c) {
      std::map<std::size_t, int> next_frontier;
      for (const auto &[s, g] : frontier) {
        const std::size_t a = position(s, c);
        const std::vector<int> &row = table[u][c][a];
        for (std::size_t b = a; b < radix[c]; ++b) {
          const std::size_t next = s + (b - a) * stride[c];
          const int g2 = g + row[b - a];
          if (g2 + cost_to_go[u + 1][next] != optimum) continue;
          auto it = next_frontier.find(next);
          if (it == next_frontier.end() || g2 < it->second) next_frontier[next] = g2;
        }
      }
      if (!next_frontier.empty()) {
        assignment[u] = static_cast<int>(c);
        frontier = std::move(next_frontier);
        break;
      }
    }
  }
  return MakeReport(p, std::move(assignment), optimum);
}

OrcReport SolveBruteForce(const Problem &p) {
  CheckStreams(p);
  const std::size_t num_utts = p.utterances.size();
  const std::size_t k = p.streams.size();
  double combos = 1.0;
  for (std::size_t u = 0; u < num_utts; ++u) combos *= static_cast<double>(k);
  if (combos > 1e6) {
    throw ValidationError("brute_force_orc: " + std::to_string(k) + "^" +
                          std::to_string(num_utts) + " assignments exceed 10^6");
  }
  std::vector<int> assignment(num_utts, 0), best_assignment = assignment;
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  while (true) {
    std::int64_t cost = 0;
    for (std::size_t c = 0; c < k; ++c) {
      cost += ConstrainedWordEdit(Concatenate(p, assignment, static_cast<int>(c)),
                                  p.streams[c], p.alignable)
                  .errors();
    }
    if (cost < best) {
      best = cost;
      best_assignment = assignment;
    }
    std::size_t pos = num_utts;
    while (pos > 0 && assignment[pos - 1] == static_cast<int>(k) - 1) {
      assignment[--pos] = 0;
    }
    if (pos == 0) break;
    ++assignment[pos - 1];
  }
  return MakeReport(p, std::move(best_assignment), best);
}

std::vector<const Segment *> TimeOrdered(const SegmentList &list) {
  std::vector<const Segment *> out;
  for (const Segment &s : list.entries) out.push_back(&s);
  std::stable_sort(out.begin(), out.end(),
                   [](const Segment *a, const Segment *b) { return a->start < b->start; });
  return out;
}

Problem UntimedProblem(const SegmentList &refs,
                       const std::vector<std::vector<std::string>> &streams) {
  Problem p;
  for (const Segment *s : TimeOrdered(refs)) p.utterances.push_back(Untimed(s->words));
  for (const auto &h : streams) p.streams.push_back(Untimed(h));
  p.alignable = AlwaysAlignable;
  return p;
}

Problem TimedProblem(const SegmentList &refs, const SegmentList &hyp, double collar) {
  if (!(collar >= 0.0)) throw ValidationError("tc_orc_wer: collar must be >= 0");
  Problem p;
  for (const Segment *s : TimeOrdered(refs)) p.utterances.push_back(SpreadWordTimes(*s));
  std::vector<std::string> speakers;
  for (const Segment &s : hyp.entries) {
    if (std::find(speakers.begin(), speakers.end(), s.speaker_id) == speakers.end()) {
      speakers.push_back(s.speaker_id);
    }
  }
  const std::vector<const Segment *> ordered = TimeOrdered(hyp);
  for (const std::string &spk : speakers) {
    std::vector<TimedWord> stream;
    for (const Segment *s : ordered) {
      if (s->speaker_id != spk) continue;
      std::vector<TimedWord> words = SpreadWordTimes(*s);
      stream.insert(stream.end(), words.begin(), words.end());
    }
    p.streams.push_back(std::move(stream));
  }
  if (p.streams.empty()) p.streams.emplace_back();
  p.alignable = [collar](const TimedWord &r, const TimedWord &h) {
    return r.start - h.end <= collar && h.start - r.end <= collar;
  };
  return p;
}

}  // namespace

EditCounts WordEdit(std::span<const std::string> ref,
                    std::span<const std::string> hyp) {
  return ConstrainedWordEdit(Untimed(ref), Untimed(hyp), AlwaysAlignable);
}

std::vector<TimedWord> SpreadWordTimes(const Segment &segment) {
  std::vector<TimedWord> out;
  const double n = static_cast<double>(segment.words.size());
  const double span = segment.end - segment.start;
  for (std::size_t i = 0; i < segment.words.size(); ++i) {
    out.push_back({segment.words[i], segment.start + span * static_cast<double>(i) / n,
                   segment.start + span * static_cast<double>(i + 1) / n});
  }
  return out;
}

EditCounts ConstrainedWordEdit(std::span<const TimedWord> ref,
                               std::span<const TimedWord> hyp,
                               const AlignablePredicate &alignable) {
  const std::size_t m = ref.size(), n = hyp.size();
  std::vector<int> d((m + 1) * (n + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int & { return d[i * (n + 1) + j]; };
  for (std::size_t i = 0; i <= m; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= n; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      int best = std::min(at(i - 1, j), at(i, j - 1)) + 1;
      if (alignable(ref[i - 1], hyp[j - 1])) {
        best = std::min(best, at(i - 1, j - 1) + (ref[i - 1].word == hyp[j - 1].word ? 0 : 1));
      }
      at(i, j) = best;
    }
  }
  EditCounts e;
  e.reference_length = static_cast<std::int64_t>(m);
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && alignable(ref[i - 1], hyp[j - 1])) {
      const int diff = ref[i - 1].word == hyp[j - 1].word ? 0 : 1;
      if (at(i, j) == at(i - 1, j - 1) + diff) {
        e.substitutions += diff;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++e.deletions;
      --i;
    } else {
      ++e.insertions;
      --j;
    }
  }
  return e;
}

OrcReport OrcWer(const SegmentList &refs,
                 const std::vector<std::vector<std::string>> &streams) {
  return SolveOrc(UntimedProblem(refs, streams));
}

OrcReport BruteForceOrc(const SegmentList &refs,
                        const std::vector<std::vector<std::string>> &streams) {
  return SolveBruteForce(UntimedProblem(refs, streams));
}

OrcReport TcOrcWer(const SegmentList &refs, const SegmentList &hyp, double collar) {
  return SolveOrc(TimedProblem(refs, hyp, collar));
}

OrcReport BruteForceTcOrc(const SegmentList &refs, const SegmentList &hyp,
                          double collar) {
  return SolveBruteForce(TimedProblem(refs, hyp, collar));
}

std::vector<std::vector<std::string>> HypothesisStreams(const SegmentList &hyp) {
  std::vector<std::string> speakers;
  for (const Segment &s : hyp.entries) {
    if (std::find(speakers.begin(), speakers.end(), s.speaker_id) == speakers.end()) {
      speakers.push_back(s.speaker_id);
    }
  }
  const std::vector<const Segment *> ordered = TimeOrdered(hyp);
  std::vector<std::vector<std::string>> streams;
  for (const std::string &spk : speakers) {
    std::vector<std::string> words;
    for (const Segment *s : ordered) {
      if (s->speaker_id == spk) words.insert(words.end(), s->words.begin(), s->words.end());
    }
    streams.push_back(std::move(words));
  }
  return streams;
}

OrcMetric ParseOrcMetric(std::string_view name) {
  if (name == "orc") return OrcMetric::kOrc;
  if (name == "tcorc") return OrcMetric::kTcOrc;
  throw ValidationError("unknown metric '" + std::string(name) + "'");
}

CorpusScore ScoreCorpus(const SegmentList &refs, const SegmentList &hyps,
                        OrcMetric metric, double collar) {
  if (!(collar >= 0.0)) throw ValidationError("score: collar must be >= 0");
  std::map<std::string, std::pair<SegmentList, SegmentList>> sessions;
  for (const Segment &s : refs.entries) sessions[s.session_id].first.entries.push_back(s);
  for (const Segment &s : hyps.entries) sessions[s.session_id].second.entries.push_back(s);
  CorpusScore out;
  for (const auto &[id, pair] : sessions) {
    SessionScore score{id, {}};
    if (metric == OrcMetric::kOrc) {
      auto streams = HypothesisStreams(pair.second);
      if (streams.empty()) streams.emplace_back();
      score.report = OrcWer(pair.first, streams);
    } else {
      score.report = TcOrcWer(pair.first, pair.second, collar);
    }
    out.total += score.report.total;
    out.sessions.push_back(std::move(score));
  }
  out.wer = out.total.Wer();
  return out;
}

namespace {

std::string FormatWer(double wer) {
  if (wer == std::numeric_limits<double>::infinity()) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", wer);
  return buf;
}

std::string CountsFields(const EditCounts &e) {
  return "errors=" + std::to_string(e.errors()) + " sub=" + std::to_string(e.substitutions) +
         " ins=" + std::to_string(e.insertions) + " del=" + std::to_string(e.deletions) +
         " ref_words=" + std::to_string(e.reference_length) + " wer=" + FormatWer(e.Wer());
}

}  // namespace

std::string FormatScoreReport(const CorpusScore &score, OrcMetric metric,
                              double collar) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", collar);
  std::string out = std::string("metric=") + (metric == OrcMetric::kOrc ? "orc" : "tcorc");
  if (metric == OrcMetric::kTcOrc) out += std::string(" collar=") + buf;
  out += "\n";
  for (const SessionScore &s : score.sessions) {
    out += "session=" + s.session_id + " " + CountsFields(s.report.total) + "\n";
  }
  out += "total sessions=" + std::to_string(score.sessions.size()) + " " +
         CountsFields(score.total) + "\n";
  return out;
}

}  // namespace tsasr
