// tsasr/core/include/tsasr/nnet/grad_check.h

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

#ifndef TSASR_NNET_GRAD_CHECK_H_
#define TSASR_NNET_GRAD_CHECK_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsasr/nnet/tape.h"

namespace tsasr::nnet {

struct GradCheckOptions {
  double step = 1e-4;
  double threshold = 1e-5;
  // Coordinates sampled across all parameters that require a gradient; every
  // coordinate is checked when the total is at most this.
  std::size_t max_coordinates = 400;
  std::uint64_t seed = 7;
  // 2: (f(x+h) - f(x-h)) / 2h. 4: the five-point central stencil
  // (f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)) / 12h.
  int stencil = 2;
};

struct ParamGradError {
  std::string name;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  double mean_relative_error = 0.0;
};

struct GradReport {
  std::vector<ParamGradError> params;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
  double mean_relative_error = 0.0;
  bool passed = false;  // max_relative_error < threshold
};

// Builds the scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape &)>;

// Central differences against the reverse-mode gradient, per coordinate, with relative error |a - n| / max(|a|, |n|, 1e-8).
// Parameter values are perturbed in place and restored.
GradReport CheckGradients(ParameterSet &params, const LossBuilder &build_loss,
                          const GradCheckOptions &options = {});

}  // namespace tsasr::nnet

#endif  // TSASR_NNET_GRAD_CHECK_H_
