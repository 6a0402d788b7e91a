// tsasr/core/include/tsasr/training.h

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

#ifndef TSASR_TRAINING_H_
#define TSASR_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tsasr/metrics.h"
#include "tsasr/model.h"
#include "tsasr/synth_data.h"

namespace tsasr {

enum class Stage { kCtcPreheat, kFddtPreheat, kFull };
Stage ParseStage(std::string_view name);  // ctc_preheat, fddt_preheat, full
const char *StageName(Stage stage);

struct TrainConfig {
  Stage stage = Stage::kFull;
  double base_lr = 1e-3;
  double fddt_lr = 1e-2;
  double weight_decay = 1e-6;
  int warmup_steps = 200;
  int max_steps = 5000;
  int batch_size = 16;
  int patience = 5;
  int max_epochs = 1000;
  std::uint64_t seed = 1;
  double label_smoothing = 0.1;

  void Validate() const;
};

// Optimizer settings shared by all stages plus the per-stage step budgets.
struct StagePlan {
  bool enabled = true;
  int max_epochs = 1;
  int warmup_steps = 200;
  int max_steps = 5000;  // 0: as many steps as max_epochs take
  int patience = 5;
};

struct ScheduleConfig {
  double base_lr = 1e-3;
  double fddt_lr = 1e-2;
  double weight_decay = 1e-6;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double label_smoothing = 0.1;
  DecodeMode dev_decode = DecodeMode::kCtc;
  StagePlan ctc_preheat{true, 4, 50, 0, 5};
  StagePlan fddt_preheat{true, 1, 10, 0, 5};
  StagePlan full{true, 1000, 200, 5000, 5};

  const StagePlan &Plan(Stage stage) const;
  // TrainConfig for `stage`; a max_steps of 0 resolves against
  // `steps_per_epoch`.
  TrainConfig ForStage(Stage stage, int steps_per_epoch) const;
  void Validate() const;
};

// Whether parameter `name` is updated in `stage`:
//   CtcPreheat  ctc.*
//   FddtPreheat fddt.* and ctc.*
//   Full        everything
bool IsTrainable(Stage stage, std::string_view name);
// Sets requires_grad on every parameter accordingly; returns the number of
// trainable values.
std::size_t ApplyTrainableSet(Stage stage, Model &model);

// peak * min(t / warmup, max(0, (max_steps - t) / (max_steps - warmup))).
double LearningRate(double peak, int step, int warmup_steps, int max_steps);

// AdamW with decoupled weight decay, beta = (0.9, 0.999), eps = 1e-8. FDDT
// parameters use fddt_lr as their peak rate, all others base_lr. Parameters
// with requires_grad false are left untouched.
class AdamW {
 public:
  explicit AdamW(const TrainConfig &config) : config_(config) {}

  // `grads` is aligned with `params`; `step` is the 1-based update index.
  // Throws NumericError naming the parameter on a non-finite gradient.
  void Step(nnet::ParameterSet &params, const std::vector<Eigen::MatrixXd> &grads,
            int step);

 private:
  TrainConfig config_;
  std::vector<Eigen::MatrixXd> m_, v_;
};

// One example per (meeting, speaker), targets being that speaker's words.
std::vector<Example> MakeExamples(const std::vector<Meeting> &meetings,
                                  const Vocabulary &vocab);

// Hypothesis segments for every speaker of `diarization` as target: the
// segment spans the speaker's active frames and carries the decoded words.
SegmentList TranscribeMeeting(const Model &model, const Eigen::MatrixXd &features,
                              const DiarizationMatrix &diarization,
                              const std::string &session_id, DecodeMode mode);

// ORC-WER over meetings, each decoded once per speaker with the reference
// diarization.
CorpusScore ScoreMeetings(const Model &model, const std::vector<Meeting> &meetings,
                          DecodeMode mode);

struct StepRecord {
  Stage stage = Stage::kFull;
  int step = 0;
  double lr = 0.0;  // base-group rate
  double joint = 0.0;
  double l_ctc = 0.0;
  double l_att = 0.0;
};

struct EpochRecord {
  Stage stage = Stage::kFull;
  int epoch = 0;  // 1-based within the stage
  int steps = 0;  // stage steps completed
  double train_loss = 0.0;
  double dev_wer = 0.0;
};

struct TrainReport {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;  // index into epochs (full stage), -1 if none
  double best_dev_wer = 0.0;
  std::string stop_reason;

  // Dev WER per full-stage epoch.
  std::vector<double> FullStageDevWer() const;
  std::string ToText() const;
};

struct TrainingData {
  std::vector<Meeting> preheat;  // single-speaker meetings for CTC preheating
  std::vector<Meeting> train;
  std::vector<Meeting> dev;
};

// Runs the enabled stages in order. After every epoch the dev set is scored;
// in the full stage training stops once `patience` epochs pass without a
// new best, or when max_steps or max_epochs is reached. On return `model`
// holds the best full-stage parameters. With a non-empty `out_dir`,
// ckpt_best, ckpt_last and report.txt are written there.
TrainReport RunSchedule(Model &model, const TrainingData &data,
                        const ScheduleConfig &config,
                        const std::filesystem::path &out_dir = {},
                        std::ostream *log = nullptr);

}  // namespace tsasr

#endif  // TSASR_TRAINING_H_
