// tsasr/core/src/losses.cc

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

#include "tsasr/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tsasr/error.h"
#include "tsasr/nnet/ops.h"

namespace tsasr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Forward/backward tables over the extended label sequence
// blank, y_1, blank, y_2, ..., y_U, blank.
struct CtcLattice {
  std::vector<int> labels;
  Eigen::MatrixXd log_alpha;  // L' x T'
  Eigen::MatrixXd log_beta;   // L' x T'
  double log_likelihood = kNegInf;
};

void CheckCtcInputs(const Eigen::MatrixXd &log_probs,
                    std::span<const int> targets, int blank) {
  const auto vocab = log_probs.rows();
  if (blank < 0 || blank >= vocab) {
    throw ValidationError("ctc_loss: blank id outside vocabulary");
  }
  for (int y : targets) {
    if (y == blank) throw ValidationError("ctc_loss: target contains blank");
    if (y < 0 || y >= vocab) {
      throw ValidationError("ctc_loss: target id " + std::to_string(y) +
                            " outside vocabulary of " + std::to_string(vocab));
    }
  }
  const int needed = CtcMinFrames(targets);
  if (log_probs.cols() < needed) {
    throw ValidationError("ctc_loss: target too long (" +
                          std::to_string(targets.size()) + " labels need " +
                          std::to_string(needed) + " frames, have " +
                          std::to_string(log_probs.cols()) + ")");
  }
}

CtcLattice RunCtcLattice(const Eigen::MatrixXd &log_probs,
                         std::span<const int> targets, int blank,
                         bool with_beta) {
  CtcLattice lat;
  const Eigen::Index num_frames = log_probs.cols();
  lat.labels.reserve(2 * targets.size() + 1);
  lat.labels.push_back(blank);
  for (int y : targets) {
    lat.labels.push_back(y);
    lat.labels.push_back(blank);
  }
  const auto num_states = static_cast<Eigen::Index>(lat.labels.size());
  auto can_skip = [&](Eigen::Index s) {
    return s >= 2 && lat.labels[s] != blank &&
           lat.labels[s] != lat.labels[s - 2];
  };

  lat.log_alpha = Eigen::MatrixXd::Constant(num_states, num_frames, kNegInf);
  lat.log_alpha(0, 0) = log_probs(blank, 0);
  if (num_states > 1) lat.log_alpha(1, 0) = log_probs(lat.labels[1], 0);
  for (Eigen::Index t = 1; t < num_frames; ++t) {
    for (Eigen::Index s = 0; s < num_states; ++s) {
      double acc = lat.log_alpha(s, t - 1);
      if (s >= 1) acc = LogAdd(acc, lat.log_alpha(s - 1, t - 1));
      if (can_skip(s)) acc = LogAdd(acc, lat.log_alpha(s - 2, t - 1));
      if (acc != kNegInf) lat.log_alpha(s, t) = acc + log_probs(lat.labels[s], t);
    }
  }
  const Eigen::Index last = num_frames - 1;
  lat.log_likelihood = lat.log_alpha(num_states - 1, last);
  if (num_states > 1) {
    lat.log_likelihood =
        LogAdd(lat.log_likelihood, lat.log_alpha(num_states - 2, last));
  }
  if (!with_beta) return lat;

  lat.log_beta = Eigen::MatrixXd::Constant(num_states, num_frames, kNegInf);
  lat.log_beta(num_states - 1, last) = log_probs(blank, last);
  if (num_states > 1) {
    lat.log_beta(num_states - 2, last) =
        log_probs(lat.labels[num_states - 2], last);
  }
  for (Eigen::Index t = last - 1; t >= 0; --t) {
    for (Eigen::Index s = 0; s < num_states; ++s) {
      double acc = lat.log_beta(s, t + 1);
      if (s + 1 < num_states) acc = LogAdd(acc, lat.log_beta(s + 1, t + 1));
      if (s + 2 < num_states && can_skip(s + 2)) {
        acc = LogAdd(acc, lat.log_beta(s + 2, t + 1));
      }
      if (acc != kNegInf) lat.log_beta(s, t) = acc + log_probs(lat.labels[s], t);
    }
  }
  return lat;
}

}  // namespace

int CtcMinFrames(std::span<const int> targets) {
  int frames = static_cast<int>(targets.size());
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (targets[i] == targets[i - 1]) ++frames;
  }
  return frames;
}

double CtcLossValue(const Eigen::MatrixXd &log_probs,
                    std::span<const int> targets, int blank) {
  if (log_probs.cols() == 0) {
    if (targets.empty()) return 0.0;
    throw ValidationError("ctc_loss: target too long (no frames)");
  }
  CheckCtcInputs(log_probs, targets, blank);
  return -RunCtcLattice(log_probs, targets, blank, false).log_likelihood;
}

nnet::Var CtcLoss(nnet::Var log_probs, std::span<const int> targets,
                  int blank) {
  const Eigen::MatrixXd &lp = log_probs.value();
  if (lp.cols() == 0) throw ValidationError("ctc_loss: no frames");
  CheckCtcInputs(lp, targets, blank);
  CtcLattice lat = RunCtcLattice(lp, targets, blank, true);
  if (lat.log_likelihood == kNegInf) {
    throw NumericError("ctc_loss: target has zero probability");
  }
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = -lat.log_likelihood;
  const int ilp = log_probs.id();
  return log_probs.tape()->Record(
      "ctc_loss", std::move(out), {log_probs},
      [ilp, lat = std::move(lat)](nnet::Tape &t, int n) {
        if (!t.NeedsGrad(ilp)) return;
        const double g = t.GradOf(n)(0, 0);
        const Eigen::MatrixXd &lp = t.Value(ilp);
        Eigen::MatrixXd &grad = t.GradRef(ilp);
        const auto num_states = static_cast<Eigen::Index>(lat.labels.size());
        for (Eigen::Index f = 0; f < lp.cols(); ++f) {
          for (Eigen::Index s = 0; s < num_states; ++s) {
            const double a = lat.log_alpha(s, f), b = lat.log_beta(s, f);
            if (a == kNegInf || b == kNegInf) continue;
            const int k = lat.labels[s];
            grad(k, f) -= g * std::exp(a + b - lp(k, f) - lat.log_likelihood);
          }
        }
      });
}

nnet::Var AttentionLoss(nnet::Var logits, std::span<const int> targets,
                        int pad_id, double smoothing) {
  const Eigen::MatrixXd &lv = logits.value();
  if (static_cast<Eigen::Index>(targets.size()) != lv.cols()) {
    throw ValidationError("attention_loss: " + std::to_string(targets.size()) +
                          " targets for " + std::to_string(lv.cols()) +
                          " positions");
  }
  const Eigen::Index vocab = lv.rows();
  Eigen::MatrixXd log_probs(vocab, lv.cols());
  int count = 0;
  for (Eigen::Index c = 0; c < lv.cols(); ++c) {
    const double m = lv.col(c).maxCoeff();
    const double lse = m + std::log((lv.col(c).array() - m).exp().sum());
    log_probs.col(c) = lv.col(c).array() - lse;
    const int y = targets[static_cast<std::size_t>(c)];
    if (y == pad_id) continue;
    if (y < 0 || y >= vocab) {
      throw ValidationError("attention_loss: target id outside vocabulary");
    }
    ++count;
  }
  if (count == 0) throw ValidationError("attention_loss: empty loss");
  double total = 0.0;
  std::vector<int> tgt(targets.begin(), targets.end());
  for (Eigen::Index c = 0; c < lv.cols(); ++c) {
    const int y = tgt[static_cast<std::size_t>(c)];
    if (y == pad_id) continue;
    total += -(1.0 - smoothing) * log_probs(y, c) -
             smoothing * log_probs.col(c).mean();
  }
  Eigen::MatrixXd out(1, 1);
  out(0, 0) = total / count;
  const int il = logits.id();
  return logits.tape()->Record(
      "attention_loss", std::move(out), {logits},
      [il, pad_id, smoothing, count, tgt = std::move(tgt),
       log_probs = std::move(log_probs)](nnet::Tape &t, int n) {
        if (!t.NeedsGrad(il)) return;
        const double g = t.GradOf(n)(0, 0) / count;
        Eigen::MatrixXd &grad = t.GradRef(il);
        const double uniform = smoothing / static_cast<double>(log_probs.rows());
        for (Eigen::Index c = 0; c < log_probs.cols(); ++c) {
          const int y = tgt[static_cast<std::size_t>(c)];
          if (y == pad_id) continue;
          Eigen::VectorXd d = log_probs.col(c).array().exp() - uniform;
          d(y) -= 1.0 - smoothing;
          grad.col(c) += g * d;
        }
      });
}

double JointLoss(double l_att, double l_ctc, double ctc_weight) {
  if (!(ctc_weight >= 0.0 && ctc_weight <= 1.0)) {
    throw ValidationError("joint_loss: ctc weight must lie in [0, 1]");
  }
  return (1.0 - ctc_weight) * l_att + ctc_weight * l_ctc;
}

nnet::Var JointLoss(nnet::Var l_att, nnet::Var l_ctc, double ctc_weight) {
  if (!(ctc_weight >= 0.0 && ctc_weight <= 1.0)) {
    throw ValidationError("joint_loss: ctc weight must lie in [0, 1]");
  }
  return nnet::Add(nnet::Scale(l_att, 1.0 - ctc_weight),
                   nnet::Scale(l_ctc, ctc_weight));
}

}  // namespace tsasr
