// tsasr/core/include/tsasr/metrics.h

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

#ifndef TSASR_METRICS_H_
#define TSASR_METRICS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tsasr/diarization_io.h"

namespace tsasr {

struct EditCounts {
  std::int64_t substitutions = 0;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t reference_length = 0;

  std::int64_t errors() const { return substitutions + insertions + deletions; }
  // 0 for an empty reference without errors, +inf for an empty reference
  // with insertions.
  double Wer() const;

  EditCounts &operator+=(const EditCounts &o);
  bool operator==(const EditCounts &) const = default;
};

// Levenshtein alignment with unit costs. Among minimal alignments the
// backtrace prefers substitutions, then deletions.
EditCounts WordEdit(std::span<const std::string> ref,
                    std::span<const std::string> hyp);

struct TimedWord {
  std::string word;
  double start = 0.0;
  double end = 0.0;
};

// Words of a segment with times spread uniformly over [start, end].
std::vector<TimedWord> SpreadWordTimes(const Segment &segment);

// As WordEdit, but a reference and hypothesis word may only be paired (as a
// match or a substitution) when `alignable` says so.
using AlignablePredicate = std::function<bool(const TimedWord &, const TimedWord &)>;
EditCounts ConstrainedWordEdit(std::span<const TimedWord> ref,
                               std::span<const TimedWord> hyp,
                               const AlignablePredicate &alignable);

struct OrcReport {
  EditCounts total;
  std::vector<int> assignment;        // reference utterance -> stream
  std::vector<EditCounts> per_stream;
  double wer = 0.0;
};

// Reference utterances are taken in start-time order (stable for ties).
// Among optimal assignments the lexicographically smallest is reported.
OrcReport OrcWer(const SegmentList &refs,
                 const std::vector<std::vector<std::string>> &streams);

// Exhaustive search; throws when streams^utterances exceeds 10^6.
OrcReport BruteForceOrc(const SegmentList &refs,
                        const std::vector<std::vector<std::string>> &streams);

// Hypothesis streams are the hypothesis speakers in first-appearance order;
// each stream is the time-ordered concatenation of its segments. Words may
// pair only when their intervals, widened by collar / 2 on both sides,
// intersect.
OrcReport TcOrcWer(const SegmentList &refs, const SegmentList &hyp, double collar);
OrcReport BruteForceTcOrc(const SegmentList &refs, const SegmentList &hyp,
                          double collar);

// Splits hypotheses into per-speaker word streams (first-appearance order).
std::vector<std::vector<std::string>> HypothesisStreams(const SegmentList &hyp);

enum class OrcMetric { kOrc, kTcOrc };
OrcMetric ParseOrcMetric(std::string_view name);  // "orc", "tcorc"

struct SessionScore {
  std::string session_id;
  OrcReport report;
};

struct CorpusScore {
  std::vector<SessionScore> sessions;  // ordered by session id
  EditCounts total;
  double wer = 0.0;
};

// Scores every session that appears in the references; sessions with no
// hypothesis get an empty stream.
CorpusScore ScoreCorpus(const SegmentList &refs, const SegmentList &hyps,
                        OrcMetric metric, double collar);

// Per-session lines followed by a corpus total; WER with four decimals.
std::string FormatScoreReport(const CorpusScore &score, OrcMetric metric,
                              double collar);

}  // namespace tsasr

#endif  // TSASR_METRICS_H_
