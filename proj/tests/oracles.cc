// tsasr/tests/oracles.cc

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

#include "oracles.h"

#include <cmath>

namespace tsasr::testing {

std::array<double, 4> EnumerateStno(std::span<const double> activity, int target) {
  std::array<double, 4> p{0, 0, 0, 0};
  const int num = static_cast<int>(activity.size());
  for (std::uint32_t pattern = 0; pattern < (1u << num); ++pattern) {
    double weight = 1.0;
    for (int s = 0; s < num; ++s) {
      weight *= (pattern >> s) & 1u ? activity[s] : 1.0 - activity[s];
    }
    const bool target_on = (pattern >> target) & 1u;
    const bool others_on = (pattern & ~(1u << target)) != 0;
    const int cls = !target_on && !others_on ? 0 : target_on && !others_on ? 1
                  : !target_on ? 2 : 3;
    p[cls] += weight;
  }
  return p;
}

double EnumerateCtcLoss(const Eigen::MatrixXd &log_probs,
                        const std::vector<int> &targets, int blank) {
  const int vocab = static_cast<int>(log_probs.rows());
  const int frames = static_cast<int>(log_probs.cols());
  std::vector<int> path(frames, 0);
  double total = 0.0;
  while (true) {
    std::vector<int> collapsed;
    int prev = -1;
    for (int label : path) {
      if (label != prev && label != blank) collapsed.push_back(label);
      prev = label;
    }
    if (collapsed == targets) {
      double lp = 0.0;
      for (int t = 0; t < frames; ++t) lp += log_probs(path[t], t);
      total += std::exp(lp);
    }
    int pos = frames;
    while (pos > 0 && path[pos - 1] == vocab - 1) path[--pos] = 0;
    if (pos == 0) break;
    ++path[pos - 1];
  }
  return -std::log(total);
}

DiarizationMatrix RandomDiarization(std::mt19937_64 &rng, int speakers, int frames) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution hard(0.2);
  DiarizationMatrix d;
  d.frame_rate = 10.0;
  d.values.resize(speakers, frames);
  for (int s = 0; s < speakers; ++s) {
    d.speaker_ids.push_back("s" + std::to_string(s));
    for (int t = 0; t < frames; ++t) {
      const double v = u(rng);
      d.values(s, t) = hard(rng) ? std::round(v) : v;
    }
  }
  return d;
}

Eigen::MatrixXd RandomLogProbs(std::mt19937_64 &rng, int vocab, int frames) {
  std::normal_distribution<double> n(0.0, 1.5);
  Eigen::MatrixXd m(vocab, frames);
  for (int t = 0; t < frames; ++t) {
    for (int v = 0; v < vocab; ++v) m(v, t) = n(rng);
    const double lse = std::log(m.col(t).array().exp().sum());
    m.col(t).array() -= lse;
  }
  return m;
}

}  // namespace tsasr::testing
