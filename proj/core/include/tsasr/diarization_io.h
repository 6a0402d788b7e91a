// tsasr/core/include/tsasr/diarization_io.h

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

#ifndef TSASR_DIARIZATION_IO_H_
#define TSASR_DIARIZATION_IO_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace tsasr {

// One SPEAKER row of an RTTM file.
struct DiarSegment {
  std::string recording_id;
  std::string speaker_id;
  double onset = 0.0;     // seconds
  double duration = 0.0;  // seconds, > 0

  double end() const { return onset + duration; }
  bool operator==(const DiarSegment &) const = default;
};

// Per-speaker, per-frame activity probabilities. Row s is speaker
// speaker_ids[s]; column t covers [t / frame_rate, (t + 1) / frame_rate).
struct DiarizationMatrix {
  std::vector<std::string> speaker_ids;
  double frame_rate = 1.0;
  Eigen::MatrixXd values;  // S x T, entries in [0, 1]

  int num_speakers() const { return static_cast<int>(values.rows()); }
  int num_frames() const { return static_cast<int>(values.cols()); }

  // Index of `speaker_id`, or -1.
  int SpeakerIndex(std::string_view speaker_id) const;

  // Throws ValidationError when an invariant is broken.
  void Validate() const;
};

// One speaker-attributed, time-stamped utterance (reference or hypothesis).
struct Segment {
  std::string session_id;
  std::string speaker_id;
  double start = 0.0;
  double end = 0.0;
  std::vector<std::string> words;

  bool operator==(const Segment &) const = default;
};

struct SegmentList {
  std::vector<Segment> entries;

  bool operator==(const SegmentList &) const = default;
};

// RTTM. Only SPEAKER records are accepted; ';' comments and blank lines are
// skipped. Columns past the speaker name are ignored. Throws ParseError
// carrying the 1-based line number.
std::vector<DiarSegment> ParseRttm(std::string_view text);
std::string WriteRttm(std::span<const DiarSegment> segments);

// Frame-center rasterization: entry (s, t) is 1 iff (t + 0.5) / frame_rate
// falls in [onset, onset + duration) of some segment of speaker s. Speakers
// are ordered by first appearance. T = ceil(total_duration * frame_rate).
DiarizationMatrix SegmentsToMatrix(std::span<const DiarSegment> segments,
                                   double frame_rate, double total_duration);

// Inverse of SegmentsToMatrix: contiguous runs of frames with value >=
// threshold become one segment each, ordered by onset then speaker row.
std::vector<DiarSegment> MatrixToSegments(const DiarizationMatrix &matrix,
                                          const std::string &recording_id,
                                          double threshold = 0.5);

// SegLST-compatible JSON array of records with keys session_id, speaker,
// start_time, end_time, words. Throws ParseError carrying the record index.
SegmentList ParseSegLst(std::string_view text);
std::string WriteSegLst(const SegmentList &segments);

// Probability-matrix text format:
//   rate=<float> speakers=<comma-separated ids>
//   <T tab-separated reals for speaker 0>
//   ...
DiarizationMatrix LoadProbMatrix(std::string_view text);
std::string WriteProbMatrix(const DiarizationMatrix &matrix);

}  // namespace tsasr

#endif  // TSASR_DIARIZATION_IO_H_
