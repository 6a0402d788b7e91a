// tsasr/core/include/tsasr/fddt.h

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

#ifndef TSASR_FDDT_H_
#define TSASR_FDDT_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "tsasr/nnet/tape.h"
#include "tsasr/stno_mask.h"

namespace tsasr {

// Frame-level diarization dependent transformations: per layer and per STNO
// class an affine map W_c z + b_c, mixed per frame with the conditioning
// mask weights.

enum class FddtParameterization { kFull, kDiagonal, kBiasOnly };
enum class FddtInit { kRandom, kIdentity, kSuppressive };

FddtParameterization ParseFddtParameterization(std::string_view name);
const char *FddtParameterizationName(FddtParameterization p);
FddtInit ParseFddtInit(std::string_view name);
const char *FddtInitName(FddtInit init);

struct FddtConfig {
  // Number of leading encoder blocks whose input is transformed.
  int num_layers = 1;
  FddtParameterization parameterization = FddtParameterization::kDiagonal;
  FddtInit init = FddtInit::kSuppressive;
  double suppress_value = 0.1;
  int model_dim = 64;

  void Validate(int encoder_depth) const;
};

// Parameter names, e.g. "fddt.l0.N.weight". Full weights are d x d,
// diagonal weights d x 1, biases d x 1; BiasOnly stores no weights.
std::string FddtWeightName(int layer, StnoClass c);
std::string FddtBiasName(int layer, StnoClass c);

// Adds the FDDT parameters for `config` to `params`:
//   Identity    W_c = I (all-ones diagonal), b_c = 0
//   Suppressive as Identity, but W_S and W_N scaled to suppress_value
//   Random      i.i.d. normal weights and biases with std 1/sqrt(d), seeded
void AddFddtParameters(const FddtConfig &config, std::uint64_t seed,
                       nnet::ParameterSet &params);

// Standalone parameter bundle, mainly for tests and tools.
struct FddtParams {
  FddtConfig config;
  nnet::ParameterSet params;
};

FddtParams InitFddt(const FddtConfig &config, std::uint64_t seed);

// z_hat_t = sum_k (W_{c_k} z_t + b_{c_k}) w_k(t) + identity_weight(t) z_t,
// evaluated as the literal weighted sum. `z` is d x T; the mask must have T
// frames. Throws ValidationError on a dimension mismatch or missing layer.
nnet::Var ApplyFddt(nnet::Tape &tape, const FddtConfig &config,
                    const nnet::ParameterSet &params, int layer, nnet::Var z,
                    const ConditioningMask &mask);

Eigen::MatrixXd ApplyFddt(const FddtParams &fddt, int layer,
                          const Eigen::MatrixXd &z,
                          const ConditioningMask &mask);

// Projects a full d x d weight gradient onto the parameterization's storage:
// Full unchanged, Diagonal its diagonal (d x 1), BiasOnly empty.
Eigen::MatrixXd ConstrainWeightGradient(FddtParameterization p,
                                        const Eigen::MatrixXd &full_gradient);

// Stored weight values per class per layer: d^2, d, 0.
std::size_t FddtWeightValuesPerClass(FddtParameterization p, int model_dim);
// Weight plus bias values per class per layer: d^2 + d, 2d, d.
std::size_t FddtTrainableValuesPerClass(FddtParameterization p, int model_dim);

}  // namespace tsasr

#endif  // TSASR_FDDT_H_
