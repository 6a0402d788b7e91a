// tsasr/core/src/fddt.cc

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

#include "tsasr/fddt.h"

#include <cmath>
#include <random>

#include "tsasr/error.h"
#include "tsasr/nnet/ops.h"

namespace tsasr {

namespace {

const char *ClassTag(StnoClass c) {
  switch (c) {
    case StnoClass::kSilence: return "S";
    case StnoClass::kTarget: return "T";
    case StnoClass::kNonTarget: return "N";
    case StnoClass::kOverlap: return "O";
  }
  return "?";
}

constexpr StnoClass kAllClasses[] = {StnoClass::kSilence, StnoClass::kTarget,
                                     StnoClass::kNonTarget, StnoClass::kOverlap};

}  // namespace

FddtParameterization ParseFddtParameterization(std::string_view name) {
  if (name == "full") return FddtParameterization::kFull;
  if (name == "diagonal" || name == "diag") return FddtParameterization::kDiagonal;
  if (name == "bias" || name == "bias_only") return FddtParameterization::kBiasOnly;
  throw ValidationError("unknown FDDT parameterization '" + std::string(name) + "'");
}

const char *FddtParameterizationName(FddtParameterization p) {
  switch (p) {
    case FddtParameterization::kFull: return "full";
    case FddtParameterization::kDiagonal: return "diagonal";
    case FddtParameterization::kBiasOnly: return "bias";
  }
  return "?";
}

FddtInit ParseFddtInit(std::string_view name) {
  if (name == "random") return FddtInit::kRandom;
  if (name == "identity") return FddtInit::kIdentity;
  if (name == "suppressive") return FddtInit::kSuppressive;
  throw ValidationError("unknown FDDT init '" + std::string(name) + "'");
}

const char *FddtInitName(FddtInit init) {
  switch (init) {
    case FddtInit::kRandom: return "random";
    case FddtInit::kIdentity: return "identity";
    case FddtInit::kSuppressive: return "suppressive";
  }
  return "?";
}

void FddtConfig::Validate(int encoder_depth) const {
  if (num_layers < 0 || num_layers > encoder_depth) {
    throw ValidationError("fddt: num_layers " + std::to_string(num_layers) +
                          " outside [0, " + std::to_string(encoder_depth) + "]");
  }
  if (!(suppress_value >= 0.0 && suppress_value <= 1.0)) {
    throw ValidationError("fddt: suppress_value must lie in [0, 1]");
  }
  if (model_dim < 1) throw ValidationError("fddt: model_dim must be positive");
}

std::string FddtWeightName(int layer, StnoClass c) {
  return "fddt.l" + std::to_string(layer) + "." + ClassTag(c) + ".weight";
}

std::string FddtBiasName(int layer, StnoClass c) {
  return "fddt.l" + std::to_string(layer) + "." + ClassTag(c) + ".bias";
}

void AddFddtParameters(const FddtConfig &config, std::uint64_t seed,
                       nnet::ParameterSet &params) {
  const int d = config.model_dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(d)));
  auto random_matrix = [&](Eigen::Index rows, Eigen::Index cols) {
    nnet::Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
  };
  for (int layer = 0; layer < config.num_layers; ++layer) {
    for (StnoClass c : kAllClasses) {
      const bool suppress = config.init == FddtInit::kSuppressive &&
                            (c == StnoClass::kSilence || c == StnoClass::kNonTarget);
      const double diag = suppress ? config.suppress_value : 1.0;
      switch (config.parameterization) {
        case FddtParameterization::kFull:
          params.Add(FddtWeightName(layer, c),
                     config.init == FddtInit::kRandom
                         ? random_matrix(d, d)
                         : nnet::Matrix(nnet::Matrix::Identity(d, d) * diag));
          break;
        case FddtParameterization::kDiagonal:
          params.Add(FddtWeightName(layer, c),
                     config.init == FddtInit::kRandom
                         ? random_matrix(d, 1)
                         : nnet::Matrix(nnet::Matrix::Constant(d, 1, diag)));
          break;
        case FddtParameterization::kBiasOnly:
          break;
      }
      params.Add(FddtBiasName(layer, c), config.init == FddtInit::kRandom
                                             ? random_matrix(d, 1)
                                             : nnet::Matrix(nnet::Matrix::Zero(d, 1)));
    }
  }
}

FddtParams InitFddt(const FddtConfig &config, std::uint64_t seed) {
  FddtParams out;
  out.config = config;
  AddFddtParameters(config, seed, out.params);
  return out;
}

nnet::Var ApplyFddt(nnet::Tape &tape, const FddtConfig &config,
                    const nnet::ParameterSet &params, int layer, nnet::Var z,
                    const ConditioningMask &mask) {
  if (layer < 0 || layer >= config.num_layers) {
    throw ValidationError("apply_fddt: no parameters for layer " +
                          std::to_string(layer));
  }
  if (z.rows() != config.model_dim) {
    throw ValidationError("apply_fddt: input has " + std::to_string(z.rows()) +
                          " rows, model_dim is " +
                          std::to_string(config.model_dim));
  }
  if (z.cols() != mask.num_frames() ||
      mask.class_weights.cols() != mask.num_frames()) {
    throw ValidationError("apply_fddt: " + std::to_string(z.cols()) +
                          " frames but mask has " +
                          std::to_string(mask.num_frames()));
  }
  nnet::Var out;
  auto accumulate = [&](nnet::Var term) {
    out = out.valid() ? nnet::Add(out, term) : term;
  };
  for (std::size_t k = 0; k < mask.classes.size(); ++k) {
    const StnoClass c = mask.classes[k];
    nnet::Var transformed;
    switch (config.parameterization) {
      case FddtParameterization::kFull:
        transformed = nnet::MatMul(tape.Param(params.Get(FddtWeightName(layer, c))), z);
        break;
      case FddtParameterization::kDiagonal:
        transformed =
            nnet::ScaleRows(z, tape.Param(params.Get(FddtWeightName(layer, c))));
        break;
      case FddtParameterization::kBiasOnly:
        transformed = z;
        break;
    }
    transformed =
        nnet::AddBias(transformed, tape.Param(params.Get(FddtBiasName(layer, c))));
    nnet::Var weights =
        tape.Constant(mask.class_weights.row(static_cast<Eigen::Index>(k)));
    accumulate(nnet::ScaleColumns(transformed, weights));
  }
  if (!mask.identity_weight.isZero(0.0)) {
    accumulate(nnet::ScaleColumns(z, tape.Constant(mask.identity_weight)));
  }
  if (!out.valid()) return nnet::Scale(z, 0.0);
  return out;
}

Eigen::MatrixXd ApplyFddt(const FddtParams &fddt, int layer,
                          const Eigen::MatrixXd &z,
                          const ConditioningMask &mask) {
  nnet::Tape tape;
  nnet::Var in = tape.Constant(z);
  return ApplyFddt(tape, fddt.config, fddt.params, layer, in, mask).value();
}

Eigen::MatrixXd ConstrainWeightGradient(FddtParameterization p,
                                        const Eigen::MatrixXd &full_gradient) {
  if (full_gradient.rows() != full_gradient.cols()) {
    throw ValidationError("constrain_gradients: weight gradient must be square");
  }
  switch (p) {
    case FddtParameterization::kFull:
      return full_gradient;
    case FddtParameterization::kDiagonal:
      return full_gradient.diagonal();
    case FddtParameterization::kBiasOnly:
      return Eigen::MatrixXd(0, 0);
  }
  return full_gradient;
}

std::size_t FddtWeightValuesPerClass(FddtParameterization p, int model_dim) {
  const auto d = static_cast<std::size_t>(model_dim);
  switch (p) {
    case FddtParameterization::kFull: return d * d;
    case FddtParameterization::kDiagonal: return d;
    case FddtParameterization::kBiasOnly: return 0;
  }
  return 0;
}

std::size_t FddtTrainableValuesPerClass(FddtParameterization p, int model_dim) {
  return FddtWeightValuesPerClass(p, model_dim) +
         static_cast<std::size_t>(model_dim);
}

}  // namespace tsasr
