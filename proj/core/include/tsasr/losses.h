// tsasr/core/include/tsasr/losses.h

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

#ifndef TSASR_LOSSES_H_
#define TSASR_LOSSES_H_

#include <span>

#include <Eigen/Core>

#include "tsasr/nnet/tape.h"

namespace tsasr {

// Averages over a batch; joint = (1 - lambda) * l_att + lambda * l_ctc.
struct LossBreakdown {
  double l_ctc = 0.0;
  double l_att = 0.0;
  double joint = 0.0;
  int batch_size = 0;
};

// Minimum number of frames that can carry `targets`: one per label plus a
// separating blank between each pair of equal neighbours.
int CtcMinFrames(std::span<const int> targets);

// Negative log-likelihood of `targets` under per-frame log-probabilities
// (V x T'), summed over all blank-interleaved alignments with the forward
// recursion in log space. Throws ValidationError("target too long") when
// T' < CtcMinFrames(targets) or when a target equals `blank`.
double CtcLossValue(const Eigen::MatrixXd &log_probs,
                    std::span<const int> targets, int blank = 0);

// Differentiable version; the backward pass uses the alpha-beta occupancy
// d(-log P) / d log p(k, t) = -sum_{s : l'_s = k} alpha_t(s) beta_t(s) / (P p(k, t)).
nnet::Var CtcLoss(nnet::Var log_probs, std::span<const int> targets,
                  int blank = 0);

// Label-smoothed cross entropy of `logits` (V x L) against `targets`
// (length L), averaged over positions whose target is not `pad_id`:
//   (1 - eps) * -log p(y) + eps * mean_k(-log p(k))
// Throws ValidationError("empty loss") when every position is padding.
nnet::Var AttentionLoss(nnet::Var logits, std::span<const int> targets,
                        int pad_id, double smoothing = 0.1);

double JointLoss(double l_att, double l_ctc, double ctc_weight);
nnet::Var JointLoss(nnet::Var l_att, nnet::Var l_ctc, double ctc_weight);

}  // namespace tsasr

#endif  // TSASR_LOSSES_H_
