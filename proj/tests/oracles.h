// tsasr/tests/oracles.h

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

#ifndef TSASR_TESTS_ORACLES_H_
#define TSASR_TESTS_ORACLES_H_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tsasr/diarization_io.h"

namespace tsasr::testing {

// STNO probabilities of one frame by enumerating all 2^S activity patterns
// of independent Bernoulli(d_s) speakers.
std::array<double, 4> EnumerateStno(std::span<const double> activity, int target);

// CTC loss by enumerating every frame labelling of a V x T' log-prob matrix
// and keeping those that collapse to `targets`.
double EnumerateCtcLoss(const Eigen::MatrixXd &log_probs,
                        const std::vector<int> &targets, int blank);

DiarizationMatrix RandomDiarization(std::mt19937_64 &rng, int speakers, int frames);

// Random log-softmax columns.
Eigen::MatrixXd RandomLogProbs(std::mt19937_64 &rng, int vocab, int frames);

}  // namespace tsasr::testing

#endif  // TSASR_TESTS_ORACLES_H_
