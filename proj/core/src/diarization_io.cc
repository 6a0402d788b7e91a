// tsasr/core/src/diarization_io.cc

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

#include "tsasr/diarization_io.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include <nlohmann/json.hpp>

#include "tsasr/error.h"
#include "tsasr/text_util.h"

namespace tsasr {

namespace {

// Slack for rounding noise in onset/duration arithmetic (seconds or frames).
constexpr double kTimeEpsilon = 1e-9;

}  // namespace

int DiarizationMatrix::SpeakerIndex(std::string_view speaker_id) const {
  for (std::size_t i = 0; i < speaker_ids.size(); ++i) {
    if (speaker_ids[i] == speaker_id) return static_cast<int>(i);
  }
  return -1;
}

void DiarizationMatrix::Validate() const {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw ValidationError("diarization matrix: frame_rate must be positive");
  }
  if (static_cast<std::size_t>(values.rows()) != speaker_ids.size()) {
    throw ValidationError("diarization matrix: " +
                          std::to_string(speaker_ids.size()) +
                          " speaker ids for " + std::to_string(values.rows()) +
                          " rows");
  }
  for (std::size_t i = 0; i < speaker_ids.size(); ++i) {
    if (speaker_ids[i].empty()) {
      throw ValidationError("diarization matrix: empty speaker id");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (speaker_ids[i] == speaker_ids[j]) {
        throw ValidationError("diarization matrix: duplicate speaker id '" +
                              speaker_ids[i] + "'");
      }
    }
  }
  for (Eigen::Index s = 0; s < values.rows(); ++s) {
    for (Eigen::Index t = 0; t < values.cols(); ++t) {
      double v = values(s, t);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("diarization matrix: value " + FormatDouble(v) +
                              " at (" + std::to_string(s) + ", " +
                              std::to_string(t) + ") outside [0, 1]");
      }
    }
  }
}

std::vector<DiarSegment> ParseRttm(std::string_view text) {
  std::vector<DiarSegment> segments;
  std::size_t line_no = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_no;
    std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == ';') continue;
    auto fields = SplitWhitespace(trimmed);
    auto fail = [&](const std::string &why) {
      throw ParseError("rttm line " + std::to_string(line_no) + ": " + why,
                       line_no);
    };
    if (fields.size() < 9 || fields.size() > 10) {
      fail("expected 9 or 10 columns, got " + std::to_string(fields.size()));
    }
    if (fields[0] != "SPEAKER") {
      fail("unsupported record type '" + std::string(fields[0]) + "'");
    }
    DiarSegment seg;
    seg.recording_id = std::string(fields[1]);
    auto onset = ParseDouble(fields[3]);
    auto duration = ParseDouble(fields[4]);
    if (!onset || !std::isfinite(*onset)) fail("non-numeric onset");
    if (!duration || !std::isfinite(*duration)) fail("non-numeric duration");
    if (*onset < 0.0) fail("negative onset");
    if (!(*duration > 0.0)) fail("duration must be positive");
    seg.onset = *onset;
    seg.duration = *duration;
    seg.speaker_id = std::string(fields[7]);
    segments.push_back(std::move(seg));
  }
  return segments;
}

std::string WriteRttm(std::span<const DiarSegment> segments) {
  std::string out;
  for (const DiarSegment &seg : segments) {
    out += "SPEAKER " + seg.recording_id + " 1 " + FormatDouble(seg.onset) +
           " " + FormatDouble(seg.duration) + " <NA> <NA> " + seg.speaker_id +
           " <NA> <NA>\n";
  }
  return out;
}

DiarizationMatrix SegmentsToMatrix(std::span<const DiarSegment> segments,
                                   double frame_rate, double total_duration) {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw ValidationError("segments_to_matrix: frame_rate must be positive");
  }
  if (!(total_duration >= 0.0) || !std::isfinite(total_duration)) {
    throw ValidationError(
        "segments_to_matrix: total_duration must be nonnegative");
  }
  DiarizationMatrix matrix;
  matrix.frame_rate = frame_rate;
  for (const DiarSegment &seg : segments) {
    if (seg.end() > total_duration + kTimeEpsilon) {
      throw ValidationError("segments_to_matrix: segment of '" +
                            seg.speaker_id + "' ends at " +
                            FormatDouble(seg.end()) + " s, past duration " +
                            FormatDouble(total_duration) + " s");
    }
    if (matrix.SpeakerIndex(seg.speaker_id) < 0) {
      matrix.speaker_ids.push_back(seg.speaker_id);
    }
  }
  const auto num_frames = static_cast<Eigen::Index>(
      std::max(0.0, std::ceil(total_duration * frame_rate - kTimeEpsilon)));
  matrix.values = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(matrix.speaker_ids.size()), num_frames);
  for (const DiarSegment &seg : segments) {
    const int s = matrix.SpeakerIndex(seg.speaker_id);
    // Start one frame early; the center test below is authoritative.
    const double lo = std::floor(seg.onset * frame_rate - 0.5) - 1.0;
    auto first = static_cast<Eigen::Index>(std::max(0.0, lo));
    for (Eigen::Index t = first; t < num_frames; ++t) {
      const double center = (static_cast<double>(t) + 0.5) / frame_rate;
      if (center >= seg.end()) break;
      if (center >= seg.onset) matrix.values(s, t) = 1.0;
    }
  }
  return matrix;
}

std::vector<DiarSegment> MatrixToSegments(const DiarizationMatrix &matrix,
                                          const std::string &recording_id,
                                          double threshold) {
  std::vector<DiarSegment> segments;
  const Eigen::Index num_frames = matrix.values.cols();
  for (Eigen::Index s = 0; s < matrix.values.rows(); ++s) {
    Eigen::Index t = 0;
    while (t < num_frames) {
      if (matrix.values(s, t) < threshold) {
        ++t;
        continue;
      }
      Eigen::Index run_end = t;
      while (run_end < num_frames && matrix.values(s, run_end) >= threshold) {
        ++run_end;
      }
      DiarSegment seg;
      seg.recording_id = recording_id;
      seg.speaker_id = matrix.speaker_ids[static_cast<std::size_t>(s)];
      seg.onset = static_cast<double>(t) / matrix.frame_rate;
      seg.duration = static_cast<double>(run_end - t) / matrix.frame_rate;
      segments.push_back(std::move(seg));
      t = run_end;
    }
  }
  std::stable_sort(segments.begin(), segments.end(),
                   [](const DiarSegment &a, const DiarSegment &b) {
                     return a.onset < b.onset;
                   });
  return segments;
}

namespace {

double JsonTime(const nlohmann::json &record, const char *key,
                std::size_t index) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(
        "seglst record " + std::to_string(index) + ": missing key '" + key + "'",
        index);
  }
  std::optional<double> value;
  if (it->is_number()) {
    value = it->get<double>();
  } else if (it->is_string()) {
    value = ParseDouble(it->get<std::string>());
  }
  if (!value || !std::isfinite(*value)) {
    throw ParseError("seglst record " + std::to_string(index) + ": key '" +
                         key + "' is not a number",
                     index);
  }
  return *value;
}

std::string JsonString(const nlohmann::json &record, const char *key,
                       std::size_t index) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw ParseError(
        "seglst record " + std::to_string(index) + ": missing key '" + key + "'",
        index);
  }
  if (!it->is_string()) {
    throw ParseError("seglst record " + std::to_string(index) + ": key '" +
                         key + "' must be a string",
                     index);
  }
  return it->get<std::string>();
}

}  // namespace

SegmentList ParseSegLst(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(std::string("seglst: invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError("seglst: top level must be an array");
  SegmentList list;
  list.entries.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const nlohmann::json &record = doc[i];
    if (!record.is_object()) {
      throw ParseError("seglst record " + std::to_string(i) +
                           ": not an object",
                       i);
    }
    Segment seg;
    seg.session_id = JsonString(record, "session_id", i);
    seg.speaker_id = JsonString(record, "speaker", i);
    seg.start = JsonTime(record, "start_time", i);
    seg.end = JsonTime(record, "end_time", i);
    if (seg.end < seg.start) {
      throw ParseError("seglst record " + std::to_string(i) +
                           ": end_time precedes start_time",
                       i);
    }
    const std::string words = JsonString(record, "words", i);
    for (std::string_view word : SplitWhitespace(words)) {
      seg.words.emplace_back(word);
    }
    list.entries.push_back(std::move(seg));
  }
  return list;
}

std::string WriteSegLst(const SegmentList &segments) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const Segment &seg : segments.entries) {
    nlohmann::ordered_json record;
    record["session_id"] = seg.session_id;
    record["speaker"] = seg.speaker_id;
    record["start_time"] = seg.start;
    record["end_time"] = seg.end;
    record["words"] = JoinWords(seg.words);
    doc.push_back(std::move(record));
  }
  return doc.dump(2) + "\n";
}

DiarizationMatrix LoadProbMatrix(std::string_view text) {
  std::vector<std::string_view> lines = SplitLines(text);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("prob matrix: missing header", 1);

  DiarizationMatrix matrix;
  bool have_rate = false, have_speakers = false;
  for (std::string_view field : SplitWhitespace(lines[0])) {
    auto eq = field.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("prob matrix header: expected key=value, got '" +
                           std::string(field) + "'",
                       1);
    }
    std::string_view key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "rate") {
      auto rate = ParseDouble(value);
      if (!rate || !(*rate > 0.0) || !std::isfinite(*rate)) {
        throw ParseError("prob matrix header: invalid rate", 1);
      }
      matrix.frame_rate = *rate;
      have_rate = true;
    } else if (key == "speakers") {
      for (std::string_view id : Split(value, ',')) {
        matrix.speaker_ids.emplace_back(id);
      }
      have_speakers = true;
    } else {
      throw ParseError(
          "prob matrix header: unknown key '" + std::string(key) + "'", 1);
    }
  }
  if (!have_rate || !have_speakers) {
    throw ParseError("prob matrix header: needs rate= and speakers=", 1);
  }
  const std::size_t num_speakers = matrix.speaker_ids.size();
  if (lines.size() - 1 != num_speakers) {
    throw ParseError("prob matrix: " + std::to_string(num_speakers) +
                         " speakers declared but " +
                         std::to_string(lines.size() - 1) + " rows present",
                     lines.size());
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 0; r < num_speakers; ++r) {
    const std::size_t line_no = r + 2;
    std::vector<double> row;
    for (std::string_view cell : SplitWhitespace(lines[r + 1])) {
      auto value = ParseDouble(cell);
      if (!value) {
        throw ParseError("prob matrix line " + std::to_string(line_no) +
                             ": non-numeric value '" + std::string(cell) + "'",
                         line_no);
      }
      if (!(*value >= 0.0 && *value <= 1.0)) {
        throw ParseError("prob matrix line " + std::to_string(line_no) +
                             ": value " + std::string(cell) +
                             " outside [0, 1]",
                         line_no);
      }
      row.push_back(*value);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("prob matrix line " + std::to_string(line_no) +
                           ": ragged row (" + std::to_string(row.size()) +
                           " values, expected " +
                           std::to_string(rows.front().size()) + ")",
                       line_no);
    }
    rows.push_back(std::move(row));
  }
  const auto num_frames =
      static_cast<Eigen::Index>(rows.empty() ? 0 : rows.front().size());
  matrix.values.resize(static_cast<Eigen::Index>(num_speakers), num_frames);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index t = 0; t < num_frames; ++t) {
      matrix.values(static_cast<Eigen::Index>(r), t) =
          rows[r][static_cast<std::size_t>(t)];
    }
  }
  try {
    matrix.Validate();
  } catch (const ValidationError &e) {
    throw ParseError(std::string("prob matrix: ") + e.what(), 1);
  }
  return matrix;
}

std::string WriteProbMatrix(const DiarizationMatrix &matrix) {
  std::string out = "rate=" + FormatDouble(matrix.frame_rate) + " speakers=";
  for (std::size_t i = 0; i < matrix.speaker_ids.size(); ++i) {
    if (i > 0) out += ',';
    out += matrix.speaker_ids[i];
  }
  out += '\n';
  for (Eigen::Index s = 0; s < matrix.values.rows(); ++s) {
    for (Eigen::Index t = 0; t < matrix.values.cols(); ++t) {
      if (t > 0) out += '\t';
      out += FormatDouble(matrix.values(s, t));
    }
    out += '\n';
  }
  return out;
}

}  // namespace tsasr
