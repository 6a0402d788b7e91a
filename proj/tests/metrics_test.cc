// tsasr/tests/metrics_test.cc

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

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "tsasr/error.h"
#include "tsasr/metrics.h"
#include "tsasr/text_util.h"

namespace tsasr {
namespace {

using Words = std::vector<std::string>;

Words W(std::string_view text) {
  Words out;
  for (std::string_view w : SplitWhitespace(text)) out.emplace_back(w);
  return out;
}

// Plain Levenshtein distance, written independently of the library.
int Distance(const Words &a, const Words &b) {
  std::vector<int> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    int diag = row[0];
    row[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// Minimum total distance over every assignment, by enumeration.
int EnumerateOrc(const SegmentList &refs, const std::vector<Words> &streams) {
  const std::size_t n = refs.entries.size(), k = streams.size();
  std::vector<int> a(n, 0);
  int best = std::numeric_limits<int>::max();
  while (true) {
    std::vector<Words> joined(k);
    for (std::size_t u = 0; u < n; ++u) {
      auto &dst = joined[static_cast<std::size_t>(a[u])];
      dst.insert(dst.end(), refs.entries[u].words.begin(), refs.entries[u].words.end());
    }
    int total = 0;
    for (std::size_t s = 0; s < k; ++s) total += Distance(joined[s], streams[s]);
    best = std::min(best, total);
    std::size_t pos = n;
    while (pos > 0 && a[pos - 1] == static_cast<int>(k) - 1) a[--pos] = 0;
    if (pos == 0) break;
    ++a[pos - 1];
  }
  return best;
}

SegmentList Refs(std::vector<std::pair<double, std::string>> utts) {
  SegmentList l;
  for (auto &[t, words] : utts) l.entries.push_back({"s", "r", t, t + 1.0, W(words)});
  return l;
}

TEST(WordEdit, Examples) {
  EditCounts e = WordEdit(W("a b c"), W("a x c"));
  EXPECT_EQ(e, (EditCounts{1, 0, 0, 3}));
  EXPECT_NEAR(e.Wer(), 1.0 / 3.0, 1e-15);
  e = WordEdit(W("a"), W(""));
  EXPECT_EQ(e.deletions, 1);
  EXPECT_EQ(e.Wer(), 1.0);
  e = WordEdit(W(""), W("a b"));
  EXPECT_EQ(e.insertions, 2);
  EXPECT_TRUE(std::isinf(e.Wer()));
  EXPECT_EQ(WordEdit(W(""), W("")).Wer(), 0.0);
}

TEST(WordEdit, TiesPreferSubstitution) {
  // "a b" vs "c": one substitution plus one deletion.
  EditCounts e = WordEdit(W("a b"), W("c"));
  EXPECT_EQ(e.substitutions, 1);
  EXPECT_EQ(e.deletions, 1);
  EXPECT_EQ(e.insertions, 0);
}

TEST(WordEdit, MatchesIndependentDistance) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    Words a, b;
    for (int i = 0, n = static_cast<int>(rng() % 7); i < n; ++i) a.push_back(std::string(1, 'a' + rng() % 4));
    for (int i = 0, n = static_cast<int>(rng() % 7); i < n; ++i) b.push_back(std::string(1, 'a' + rng() % 4));
    EditCounts e = WordEdit(a, b);
    ASSERT_EQ(e.errors(), Distance(a, b));
    ASSERT_EQ(e.reference_length, static_cast<std::int64_t>(a.size()));
    ASSERT_EQ(e.deletions - e.insertions, static_cast<std::int64_t>(a.size()) - static_cast<std::int64_t>(b.size()));
  }
}

TEST(OrcWer, ExactSplit) {
  OrcReport r = OrcWer(Refs({{0, "a b"}, {1, "c"}}), {W("a b"), W("c")});
  EXPECT_EQ(r.total.errors(), 0);
  EXPECT_EQ(r.assignment, (std::vector<int>{0, 1}));
}

TEST(OrcWer, CrossedStreams) {
  SegmentList refs = Refs({{0, "a"}, {1, "b"}});
  const std::vector<Words> streams{W("b"), W("a")};
  const int want = EnumerateOrc(refs, streams);
  EXPECT_EQ(want, 0);
  OrcReport r = OrcWer(refs, streams);
  EXPECT_EQ(r.total.errors(), want);
  EXPECT_EQ(r.assignment, (std::vector<int>{1, 0}));
}

TEST(OrcWer, SingleStreamIsPlainWer) {
  SegmentList refs = Refs({{2, "c d"}, {0, "a b"}, {1, "x"}});
  OrcReport r = OrcWer(refs, {W("a b x c")});
  EXPECT_EQ(r.total, WordEdit(W("a b x c d"), W("a b x c")));
}

TEST(OrcWer, EmptyCases) {
  OrcReport r = OrcWer(SegmentList{}, {Words{}});
  EXPECT_EQ(r.total.errors(), 0);
  EXPECT_EQ(r.wer, 0.0);
  EXPECT_EQ(BruteForceOrc(SegmentList{}, {W("a")}).total.insertions, 1);
}

TEST(OrcWer, OneUtteranceIsMinOverStreams) {
  SegmentList refs = Refs({{0, "a b c"}});
  std::vector<Words> streams{W("a"), W("a b d"), W("")};
  int best = 1 << 30;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    int total = 0;
    for (std::size_t o = 0; o < streams.size(); ++o) {
      total += Distance(o == s ? W("a b c") : Words{}, streams[o]);
    }
    best = std::min(best, total);
  }
  EXPECT_EQ(OrcWer(refs, streams).total.errors(), best);
}

struct Instance {
  SegmentList refs;
  SegmentList hyp;
  std::vector<Words> streams;
};

Instance RandomInstance(std::mt19937_64 &rng) {
  Instance in;
  const int num_utts = static_cast<int>(rng() % 7);
  const int num_streams = 1 + static_cast<int>(rng() % 3);
  std::uniform_real_distribution<double> start(0.0, 20.0), len(0.2, 3.0);
  for (int u = 0; u < num_utts; ++u) {
    Segment s{"s", "r" + std::to_string(rng() % 3), start(rng), 0.0, {}};
    s.end = s.start + len(rng);
    for (int k = 0, n = 1 + static_cast<int>(rng() % 4); k < n; ++k) {
      s.words.push_back(std::string(1, 'a' + rng() % 5));
    }
    in.refs.entries.push_back(s);
  }
  std::stable_sort(in.refs.entries.begin(), in.refs.entries.end(),
                   [](const Segment &a, const Segment &b) { return a.start < b.start; });
  in.streams.resize(static_cast<std::size_t>(num_streams));
  for (int s = 0; s < num_streams; ++s) {
    double t = start(rng) / 4;
    for (int seg = 0, n = static_cast<int>(rng() % 3); seg < n; ++seg) {
      Segment h{"s", "h" + std::to_string(s), t, t + len(rng), {}};
      t = h.end + start(rng) / 4;
      for (int k = 0, m = static_cast<int>(rng() % 5); k < m; ++k) {
        h.words.push_back(std::string(1, 'a' + rng() % 5));
      }
      if (h.words.empty()) continue;
      in.streams[static_cast<std::size_t>(s)].insert(in.streams[static_cast<std::size_t>(s)].end(),
                                                     h.words.begin(), h.words.end());
      in.hyp.entries.push_back(h);
    }
  }
  return in;
}

TEST(OrcWer, MatchesBruteForceAndEnumeration) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 600; ++trial) {
    Instance in = RandomInstance(rng);
    OrcReport dp = OrcWer(in.refs, in.streams);
    OrcReport bf = BruteForceOrc(in.refs, in.streams);
    ASSERT_EQ(dp.total.errors(), bf.total.errors());
    ASSERT_EQ(dp.total, bf.total);
    ASSERT_EQ(dp.assignment, bf.assignment);
    ASSERT_EQ(dp.total.errors(), EnumerateOrc(in.refs, in.streams));
    EditCounts sum;
    for (const EditCounts &e : dp.per_stream) sum += e;
    ASSERT_EQ(sum, dp.total);
  }
}

TEST(OrcWer, StreamPermutationKeepsTotal) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Instance in = RandomInstance(rng);
    std::vector<Words> rev(in.streams.rbegin(), in.streams.rend());
    ASSERT_EQ(OrcWer(in.refs, in.streams).total.errors(), OrcWer(in.refs, rev).total.errors());
  }
}

TEST(OrcWer, ExtraEmptyStreamNeverHurts) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    Instance in = RandomInstance(rng);
    std::vector<Words> more = in.streams;
    more.emplace_back();
    ASSERT_LE(OrcWer(in.refs, more).total.errors(), OrcWer(in.refs, in.streams).total.errors());
  }
}

TEST(OrcWer, IdenticalIsZero) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Instance in = RandomInstance(rng);
    // Hypothesis = references, one stream per reference speaker.
    SegmentList hyp = in.refs;
    CorpusScore orc = ScoreCorpus(in.refs, hyp, OrcMetric::kOrc, 0.0);
    CorpusScore tc = ScoreCorpus(in.refs, hyp, OrcMetric::kTcOrc, 0.0);
    EXPECT_EQ(orc.total.errors(), 0);
    EXPECT_EQ(tc.total.errors(), 0);
  }
}

TEST(BruteForceOrc, SizeGuard) {
  SegmentList refs;
  for (int u = 0; u < 13; ++u) refs.entries.push_back({"s", "r", double(u), u + 1.0, {"a"}});
  EXPECT_THROW(BruteForceOrc(refs, std::vector<Words>(3)), ValidationError);
}

TEST(TcOrcWer, DisjointTimesCostInsertionPlusDeletion) {
  SegmentList refs;
  refs.entries.push_back({"s", "r", 0.0, 1.0, W("a b")});
  SegmentList hyp;
  hyp.entries.push_back({"s", "h", 5.0, 6.0, W("a b")});
  OrcReport r = TcOrcWer(refs, hyp, 0.0);
  EXPECT_EQ(r.total.deletions, 2);
  EXPECT_EQ(r.total.insertions, 2);
  EXPECT_EQ(r.total.substitutions, 0);
}

TEST(TcOrcWer, CollarWidensWindow) {
  // [0,1] and [2,3] widened by 1 on each side become [-1,2] and [1,4].
  SegmentList refs, hyp;
  refs.entries.push_back({"s", "r", 0.0, 1.0, W("a")});
  hyp.entries.push_back({"s", "h", 2.0, 3.0, W("a")});
  EXPECT_EQ(TcOrcWer(refs, hyp, 2.0).total.errors(), 0);
  EXPECT_EQ(TcOrcWer(refs, hyp, 0.99).total.errors(), 2);
  EXPECT_THROW(TcOrcWer(refs, hyp, -1.0), ValidationError);
}

TEST(TcOrcWer, HugeCollarEqualsOrc) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 500; ++trial) {
    Instance in = RandomInstance(rng);
    std::vector<Words> streams = HypothesisStreams(in.hyp);
    if (streams.empty()) streams.emplace_back();
    OrcReport tc = TcOrcWer(in.refs, in.hyp, 1e6);
    ASSERT_EQ(tc.total, OrcWer(in.refs, streams).total);
  }
}

TEST(TcOrcWer, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    Instance in = RandomInstance(rng);
    const double collar = (rng() % 5) * 0.75;
    OrcReport dp = TcOrcWer(in.refs, in.hyp, collar);
    OrcReport bf = BruteForceTcOrc(in.refs, in.hyp, collar);
    ASSERT_EQ(dp.total, bf.total);
    ASSERT_EQ(dp.assignment, bf.assignment);
  }
}

TEST(TcOrcWer, MonotoneInCollar) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    Instance in = RandomInstance(rng);
    std::int64_t prev = std::numeric_limits<std::int64_t>::max();
    for (double collar : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 100.0}) {
      const std::int64_t e = TcOrcWer(in.refs, in.hyp, collar).total.errors();
      ASSERT_LE(e, prev);
      prev = e;
    }
  }
}

TEST(SpreadWordTimes, Uniform) {
  auto words = SpreadWordTimes({"s", "a", 1.0, 3.0, W("x y z w")});
  ASSERT_EQ(words.size(), 4u);
  EXPECT_DOUBLE_EQ(words[0].start, 1.0);
  EXPECT_DOUBLE_EQ(words[1].start, 1.5);
  EXPECT_DOUBLE_EQ(words[3].end, 3.0);
}

TEST(ScoreCorpus, ReportFormat) {
  SegmentList refs;
  refs.entries.push_back({"b", "r", 0.0, 1.0, W("a b")});
  refs.entries.push_back({"a", "r", 0.0, 1.0, W("c")});
  SegmentList hyps;
  hyps.entries.push_back({"b", "h", 0.0, 1.0, W("a b")});
  CorpusScore s = ScoreCorpus(refs, hyps, OrcMetric::kOrc, 0.0);
  ASSERT_EQ(s.sessions.size(), 2u);
  EXPECT_EQ(s.sessions[0].session_id, "a");
  EXPECT_EQ(s.total.deletions, 1);
  EXPECT_NEAR(s.wer, 1.0 / 3.0, 1e-15);
  const std::string text = FormatScoreReport(s, OrcMetric::kOrc, 0.0);
  EXPECT_NE(text.find("session=a "), std::string::npos);
  EXPECT_NE(text.find("wer=0.3333"), std::string::npos) << text;
  EXPECT_EQ(ParseOrcMetric("tcorc"), OrcMetric::kTcOrc);
  EXPECT_THROW(ParseOrcMetric("cp"), ValidationError);
}

}  // namespace
}  // namespace tsasr
