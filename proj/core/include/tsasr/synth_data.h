// tsasr/core/include/tsasr/synth_data.h

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

#ifndef TSASR_SYNTH_DATA_H_
#define TSASR_SYNTH_DATA_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tsasr/diarization_io.h"

namespace tsasr {

struct SynthConfig {
  int num_speakers = 2;
  int vocab_size = 24;            // content tokens w00, w01, ...
  int frames_per_token = 4;
  int utterances_per_speaker = 3;
  int min_tokens_per_utterance = 2;
  int max_tokens_per_utterance = 5;
  double overlap_ratio = 0.3;     // overlapped frames / speech frames
  double silence_ratio = 0.1;     // silent frames / all frames
  double noise_std = 0.1;
  int feature_dim = 16;
  double frame_rate = 25.0;
  int num_styles = 6;
  double style_scale = 0.6;
  // Scale of the component specific to a (token, style) pair.
  double pair_scale = 0.0;
  // Each style also carries a per-channel gain exp(gain_scale * g), g ~ N(0, 1).
  double gain_scale = 1.0;
  double style_share_prob = 0.1;  // chance that all speakers share one style
  // Token embeddings and the style pool come from this seed, so they are
  // common to every meeting and every split.
  std::uint64_t embedding_seed = 1234;
  std::uint64_t seed = 1;         // per-meeting randomness

  void Validate() const;
};

struct Meeting {
  std::string id;
  Eigen::MatrixXd features;        // feature_dim x T, float-representable
  DiarizationMatrix diarization;   // binary ground truth, speakers spk0..
  SegmentList transcripts;         // one entry per utterance, by start time

  int num_frames() const { return static_cast<int>(features.cols()); }
  // Words of one speaker in time order.
  std::vector<std::string> SpeakerWords(const std::string &speaker_id) const;
};

// Same rendering with one speaker and no overlap, used for CTC preheating.
SynthConfig SingleSpeakerConfig(const SynthConfig &config);

Meeting GenerateMeeting(const SynthConfig &config, const std::string &id = "m");

enum class CorpusSplit { kTrain, kDev, kTest };
CorpusSplit ParseSplit(std::string_view name);
const char *SplitName(CorpusSplit split);

// Seed of meeting `index` in `split`; disjoint across splits for
// index < 1000000.
std::uint64_t MeetingSeed(std::uint64_t base_seed, CorpusSplit split, int index);

std::vector<Meeting> GenerateCorpus(const SynthConfig &config, int num_meetings,
                                    CorpusSplit split);

// Writes <dir>/<split>/<id>/{features.bin, ref.rttm, ref.seglst.json} and
// <dir>/<split>/meetings.txt.
void RenderCorpus(const SynthConfig &config, int num_meetings, CorpusSplit split,
                  const std::filesystem::path &dir);

// Reads meetings listed in <split_dir>/meetings.txt.
std::vector<Meeting> LoadCorpusSplit(const std::filesystem::path &split_dir);
Meeting LoadMeeting(const std::filesystem::path &meeting_dir);

// Binary feature file: "TSFT" magic, version byte 1, little-endian uint32
// feature_dim and frame count, float64 frame rate, then float32 values with
// one frame after another (frame-major).
std::string EncodeFeatures(const Eigen::MatrixXd &features, double frame_rate);
Eigen::MatrixXd DecodeFeatures(std::string_view bytes, double *frame_rate = nullptr);

std::string ReadFile(const std::filesystem::path &path);
void WriteFile(const std::filesystem::path &path, std::string_view contents);

}  // namespace tsasr

#endif  // TSASR_SYNTH_DATA_H_
