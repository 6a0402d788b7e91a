// tsasr/core/src/nnet/grad_check.cc

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

#include "tsasr/nnet/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tsasr/error.h"

namespace tsasr::nnet {

GradReport CheckGradients(ParameterSet &params, const LossBuilder &build_loss,
                          const GradCheckOptions &options) {
  if (!(options.step > 0.0)) {
    throw ValidationError("check_gradients: step must be positive");
  }
  if (options.stencil != 2 && options.stencil != 4) {
    throw ValidationError("check_gradients: stencil must be 2 or 4");
  }
  std::vector<Matrix> analytic;
  {
    Tape tape;
    Var loss = build_loss(tape);
    tape.Backward(loss);
    analytic = CollectGradients(tape, params);
  }

  struct Coordinate {
    std::size_t param;
    Eigen::Index index;
  };
  std::vector<Coordinate> all;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p].requires_grad) continue;
    for (Eigen::Index i = 0; i < params[p].value.size(); ++i) {
      all.push_back({p, i});
    }
  }
  if (all.size() > options.max_coordinates) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(options.max_coordinates);
    std::sort(all.begin(), all.end(), [](const Coordinate &a, const Coordinate &b) {
      return a.param != b.param ? a.param < b.param : a.index < b.index;
    });
  }

  auto evaluate = [&]() {
    Tape tape;
    return build_loss(tape).scalar();
  };

  GradReport report;
  std::vector<ParamGradError> per_param(params.size());
  double total_error = 0.0;
  for (const Coordinate &c : all) {
    double &x = params[c.param].value.data()[c.index];
    const double saved = x;
    auto at = [&](double offset) {
      x = saved + offset;
      const double f = evaluate();
      x = saved;
      return f;
    };
    const double h = options.step;
    const double numeric =
        options.stencil == 4
            ? (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h)
            : (at(h) - at(-h)) / (2 * h);
    const double a = analytic[c.param].data()[c.index];
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
    const double rel = std::abs(a - numeric) / denom;
    ParamGradError &e = per_param[c.param];
    e.name = params[c.param].name;
    e.coordinates += 1;
    e.max_relative_error = std::max(e.max_relative_error, rel);
    e.mean_relative_error += rel;
    report.max_relative_error = std::max(report.max_relative_error, rel);
    total_error += rel;
  }
  for (ParamGradError &e : per_param) {
    if (e.coordinates == 0) continue;
    e.mean_relative_error /= static_cast<double>(e.coordinates);
    report.params.push_back(e);
  }
  report.coordinates = all.size();
  report.mean_relative_error =
      all.empty() ? 0.0 : total_error / static_cast<double>(all.size());
  report.passed = report.max_relative_error < options.threshold;
  return report;
}

}  // namespace tsasr::nnet
