// tsasr/core/src/training.cc

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

#include "tsasr/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "tsasr/checkpoint.h"
#include "tsasr/error.h"
#include "tsasr/nnet/ops.h"
#include "tsasr/text_util.h"

namespace tsasr {

Stage ParseStage(std::string_view name) {
  if (name == "ctc_preheat") return Stage::kCtcPreheat;
  if (name == "fddt_preheat") return Stage::kFddtPreheat;
  if (name == "full") return Stage::kFull;
  throw ValidationError("unknown stage '" + std::string(name) + "'");
}

const char *StageName(Stage stage) {
  switch (stage) {
    case Stage::kCtcPreheat: return "ctc_preheat";
    case Stage::kFddtPreheat: return "fddt_preheat";
    case Stage::kFull: return "full";
  }
  return "?";
}

void TrainConfig::Validate() const {
  if (!(base_lr > 0.0) || !(fddt_lr > 0.0)) {
    throw ValidationError("train: learning rates must be > 0");
  }
  if (!(weight_decay >= 0.0)) throw ValidationError("train: weight_decay must be >= 0");
  if (warmup_steps < 0) throw ValidationError("train: warmup_steps must be >= 0");
  if (max_steps < 1) throw ValidationError("train: max_steps must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (patience < 1) throw ValidationError("train: patience must be >= 1");
  if (max_epochs < 1) throw ValidationError("train: max_epochs must be >= 1");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw ValidationError("train: label_smoothing must lie in [0, 1)");
  }
}

const StagePlan &ScheduleConfig::Plan(Stage stage) const {
  switch (stage) {
    case Stage::kCtcPreheat: return ctc_preheat;
    case Stage::kFddtPreheat: return fddt_preheat;
    case Stage::kFull: break;
  }
  return full;
}

TrainConfig ScheduleConfig::ForStage(Stage stage, int steps_per_epoch) const {
  const StagePlan &plan = Plan(stage);
  TrainConfig c;
  c.stage = stage;
  c.base_lr = base_lr;
  c.fddt_lr = fddt_lr;
  c.weight_decay = weight_decay;
  c.warmup_steps = plan.warmup_steps;
  c.max_steps = plan.max_steps > 0 ? plan.max_steps : plan.max_epochs * steps_per_epoch;
  c.batch_size = batch_size;
  c.patience = plan.patience;
  c.max_epochs = plan.max_epochs;
  c.seed = seed;
  c.label_smoothing = label_smoothing;
  return c;
}

void ScheduleConfig::Validate() const {
  for (Stage s : {Stage::kCtcPreheat, Stage::kFddtPreheat, Stage::kFull}) {
    const StagePlan &p = Plan(s);
    if (p.max_steps < 0) throw ValidationError("train: max_steps must be >= 0");
    ForStage(s, 1).Validate();
  }
}

bool IsTrainable(Stage stage, std::string_view name) {
  switch (stage) {
    case Stage::kCtcPreheat: return name.starts_with(kCtcPrefix);
    case Stage::kFddtPreheat:
      return name.starts_with(kCtcPrefix) || name.starts_with(kFddtPrefix);
    case Stage::kFull: return true;
  }
  return false;
}

std::size_t ApplyTrainableSet(Stage stage, Model &model) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    nnet::Parameter &p = model.params[i];
    p.requires_grad = IsTrainable(stage, p.name);
    if (p.requires_grad) count += static_cast<std::size_t>(p.value.size());
  }
  return count;
}

double LearningRate(double peak, int step, int warmup_steps, int max_steps) {
  const double t = step;
  const double warm = warmup_steps > 0 ? t / warmup_steps : 1.0;
  double decay;
  if (max_steps > warmup_steps) {
    decay = std::max(0.0, (max_steps - t) / static_cast<double>(max_steps - warmup_steps));
  } else {
    decay = step <= max_steps ? 1.0 : 0.0;
  }
  return peak * std::min(warm, decay);
}

void AdamW::Step(nnet::ParameterSet &params, const std::vector<Eigen::MatrixXd> &grads,
                 int step) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  if (grads.size() != params.size()) {
    throw ValidationError("adamw: gradient count does not match parameters");
  }
  if (m_.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.push_back(Eigen::MatrixXd::Zero(params[i].value.rows(), params[i].value.cols()));
      v_.push_back(m_.back());
    }
  }
  const double base_lr =
      LearningRate(config_.base_lr, step, config_.warmup_steps, config_.max_steps);
  const double fddt_lr =
      LearningRate(config_.fddt_lr, step, config_.warmup_steps, config_.max_steps);
  const double correction1 = 1.0 - std::pow(kBeta1, step);
  const double correction2 = 1.0 - std::pow(kBeta2, step);
  for (std::size_t i = 0; i < params.size(); ++i) {
    nnet::Parameter &p = params[i];
    if (!p.requires_grad) continue;
    const Eigen::MatrixXd &g = grads[i];
    if (!g.allFinite()) {
      throw NumericError("adamw: non-finite gradient for '" + p.name + "' at step " +
                         std::to_string(step));
    }
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g.cwiseProduct(g);
    const double lr = p.name.starts_with(kFddtPrefix) ? fddt_lr : base_lr;
    if (lr == 0.0) continue;
    p.value *= 1.0 - lr * config_.weight_decay;
    p.value.array() -= lr * (m_[i].array() / correction1) /
                       ((v_[i].array() / correction2).sqrt() + kEps);
  }
}

std::vector<Example> MakeExamples(const std::vector<Meeting> &meetings,
                                  const Vocabulary &vocab) {
  std::vector<Example> out;
  for (const Meeting &m : meetings) {
    for (int s = 0; s < m.diarization.num_speakers(); ++s) {
      Example ex;
      ex.features = m.features;
      ex.stno = ComputeStno(m.diarization, s);
      const auto words = m.SpeakerWords(m.diarization.speaker_ids[s]);
      ex.targets = vocab.Encode(words);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

SegmentList TranscribeMeeting(const Model &model, const Eigen::MatrixXd &features,
                              const DiarizationMatrix &diarization,
                              const std::string &session_id, DecodeMode mode) {
  SegmentList out;
  const double rate = diarization.frame_rate;
  for (int s = 0; s < diarization.num_speakers(); ++s) {
    const std::vector<int> ids =
        Transcribe(model, features, ComputeStno(diarization, s), mode);
    Segment seg;
    seg.session_id = session_id;
    seg.speaker_id = diarization.speaker_ids[s];
    seg.words = model.config.vocab.Decode(ids);
    if (seg.words.empty()) continue;
    int first = -1, last = -1;
    for (int t = 0; t < diarization.num_frames(); ++t) {
      if (diarization.values(s, t) >= 0.5) {
        if (first < 0) first = t;
        last = t;
      }
    }
    if (first < 0) {
      first = 0;
      last = diarization.num_frames() - 1;
    }
    seg.start = first / rate;
    seg.end = (last + 1) / rate;
    out.entries.push_back(std::move(seg));
  }
  return out;
}

CorpusScore ScoreMeetings(const Model &model, const std::vector<Meeting> &meetings,
                          DecodeMode mode) {
  SegmentList refs, hyps;
  for (const Meeting &m : meetings) {
    refs.entries.insert(refs.entries.end(), m.transcripts.entries.begin(),
                        m.transcripts.entries.end());
    SegmentList h = TranscribeMeeting(model, m.features, m.diarization, m.id, mode);
    hyps.entries.insert(hyps.entries.end(), h.entries.begin(), h.entries.end());
  }
  return ScoreCorpus(refs, hyps, OrcMetric::kOrc, 0.0);
}

std::vector<double> TrainReport::FullStageDevWer() const {
  std::vector<double> out;
  for (const EpochRecord &e : epochs) {
    if (e.stage == Stage::kFull) out.push_back(e.dev_wer);
  }
  return out;
}

std::string TrainReport::ToText() const {
  std::string out = "stop_reason=" + stop_reason + "\n";
  out += "best_epoch=" + std::to_string(best_epoch) +
         " best_dev_wer=" + FormatDouble(best_dev_wer) + "\n";
  for (const EpochRecord &e : epochs) {
    out += std::string("epoch stage=") + StageName(e.stage) +
           " epoch=" + std::to_string(e.epoch) + " steps=" + std::to_string(e.steps) +
           " train_loss=" + FormatDouble(e.train_loss) +
           " dev_wer=" + FormatDouble(e.dev_wer) + "\n";
  }
  for (const StepRecord &s : steps) {
    out += std::string("step stage=") + StageName(s.stage) +
           " step=" + std::to_string(s.step) + " lr=" + FormatDouble(s.lr) +
           " joint=" + FormatDouble(s.joint) + " ctc=" + FormatDouble(s.l_ctc) +
           " att=" + FormatDouble(s.l_att) + "\n";
  }
  return out;
}

namespace {

void CopyValues(const nnet::ParameterSet &from, nnet::ParameterSet &to) {
  for (std::size_t i = 0; i < to.size(); ++i) to[i].value = from[i].value;
}

}  // namespace

TrainReport RunSchedule(Model &model, const TrainingData &data,
                        const ScheduleConfig &config,
                        const std::filesystem::path &out_dir, std::ostream *log) {
  config.Validate();
  if (data.train.empty()) throw ValidationError("train: empty training set");
  if (data.dev.empty()) throw ValidationError("train: empty dev set");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  TrainReport report;
  nnet::ParameterSet best = model.params;
  bool full_ran = false;
  for (Stage stage : {Stage::kCtcPreheat, Stage::kFddtPreheat, Stage::kFull}) {
    const StagePlan &plan = config.Plan(stage);
    if (!plan.enabled) continue;
    const std::vector<Meeting> &meetings =
        stage == Stage::kCtcPreheat ? data.preheat : data.train;
    if (meetings.empty()) {
      throw ValidationError(std::string("train: no data for stage ") + StageName(stage));
    }
    const std::vector<Example> examples = MakeExamples(meetings, model.config.vocab);
    const int batch = config.batch_size;
    const int num_examples = static_cast<int>(examples.size());
    const int steps_per_epoch = (num_examples + batch - 1) / batch;
    const TrainConfig tc = config.ForStage(stage, steps_per_epoch);
    ApplyTrainableSet(stage, model);
    AdamW optimizer(tc);
    std::seed_seq seq{static_cast<std::uint64_t>(config.seed),
                      static_cast<std::uint64_t>(stage)};
    std::mt19937_64 rng(seq);
    std::vector<int> order(static_cast<std::size_t>(num_examples));
    std::vector<Eigen::MatrixXd> grads(model.params.size());

    int step = 0, since_best = 0;
    std::string stop;
    for (int epoch = 1; epoch <= tc.max_epochs && stop.empty(); ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      double loss_sum = 0.0;
      int loss_count = 0;
      for (int first = 0; first < num_examples; first += batch) {
        if (step >= tc.max_steps) break;
        ++step;
        const int last = std::min(num_examples, first + batch);
        const double scale = 1.0 / (last - first);
        for (std::size_t i = 0; i < grads.size(); ++i) {
          grads[i].setZero(model.params[i].value.rows(), model.params[i].value.cols());
        }
        StepRecord rec{stage, step, LearningRate(tc.base_lr, step, tc.warmup_steps,
                                                 tc.max_steps),
                       0.0, 0.0, 0.0};
        for (int k = first; k < last; ++k) {
          nnet::Tape tape;
          ExampleLosses l = ComputeExampleLosses(tape, model, examples[order[k]],
                                                 tc.label_smoothing);
          tape.Backward(nnet::Scale(l.joint, scale));
          for (std::size_t i = 0; i < grads.size(); ++i) {
            if (const Eigen::MatrixXd *g = tape.Grad(model.params[i])) grads[i] += *g;
          }
          rec.joint += scale * l.joint.scalar();
          rec.l_ctc += scale * l.l_ctc;
          rec.l_att += scale * l.l_att;
        }
        optimizer.Step(model.params, grads, step);
        report.steps.push_back(rec);
        loss_sum += rec.joint;
        ++loss_count;
      }

      EpochRecord er{stage, epoch, step, loss_count ? loss_sum / loss_count : 0.0, 0.0};
      er.dev_wer = ScoreMeetings(model, data.dev, config.dev_decode).wer;
      if (std::isnan(er.dev_wer)) throw NumericError("train: dev WER is NaN");
      report.epochs.push_back(er);
      if (log) {
        *log << StageName(stage) << " epoch " << epoch << " step " << step
             << " train_loss " << er.train_loss << " dev_wer " << er.dev_wer << "\n"
             << std::flush;
      }
      if (stage == Stage::kFull) {
        full_ran = true;
        if (report.best_epoch < 0 || er.dev_wer < report.best_dev_wer) {
          report.best_epoch = static_cast<int>(report.epochs.size()) - 1;
          report.best_dev_wer = er.dev_wer;
          best = model.params;
          since_best = 0;
        } else if (++since_best >= tc.patience) {
          stop = "patience";
        }
      }
      if (stop.empty() && step >= tc.max_steps) stop = "max_steps";
    }
    if (stop.empty()) stop = "max_epochs";
    if (stage == Stage::kFull) report.stop_reason = stop;
  }
  if (!full_ran) {
    report.stop_reason = "no_full_stage";
    best = model.params;
  }
  if (!out_dir.empty()) SaveCheckpoint(out_dir / "ckpt_last", model);
  CopyValues(best, model.params);
  if (!out_dir.empty()) {
    SaveCheckpoint(out_dir / "ckpt_best", model);
    WriteFile(out_dir / "report.txt", report.ToText());
  }
  return report;
}

}  // namespace tsasr
