// tsasr/core/include/tsasr/stno_mask.h

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

#ifndef TSASR_STNO_MASK_H_
#define TSASR_STNO_MASK_H_

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "tsasr/diarization_io.h"

namespace tsasr {

// The four mutually exclusive per-frame events seen from one target speaker.
enum class StnoClass { kSilence = 0, kTarget = 1, kNonTarget = 2, kOverlap = 3 };

inline constexpr int kNumStnoClasses = 4;

// Per-frame distribution over (silence, target-only, non-target-only,
// overlap) for one target speaker. Rows follow StnoClass order.
struct StnoMask {
  int target_index = 0;
  double frame_rate = 1.0;
  Eigen::Matrix<double, 4, Eigen::Dynamic> values;

  int num_frames() const { return static_cast<int>(values.cols()); }
  double p(StnoClass c, int t) const {
    return values(static_cast<int>(c), t);
  }

  // Entries in [0, 1], columns summing to 1 within 1e-9.
  void Validate() const;
};

// Coarser conditioning schemes. Classes dropped by a scheme fall back to the
// untransformed frame via identity_weight.
enum class MaskScheme { kStno, kTno, kTn, kT };

MaskScheme ParseMaskScheme(std::string_view name);  // "stno", "tno", "tn", "t"
const char *MaskSchemeName(MaskScheme scheme);

struct ConditioningMask {
  MaskScheme scheme = MaskScheme::kStno;
  // Which STNO transform each row of class_weights drives.
  std::vector<StnoClass> classes;
  Eigen::MatrixXd class_weights;      // K x T
  Eigen::RowVectorXd identity_weight;  // 1 x T

  int num_frames() const { return static_cast<int>(identity_weight.size()); }

  // identity_weight + column sums of class_weights == 1 within 1e-9.
  void Validate() const;
};

// Independent-speaker event probabilities for speaker `target_index`:
//   p_S = prod_s (1 - d_s)
//   p_T = d_k prod_{s != k} (1 - d_s)
//   p_N = (1 - d_k) (1 - prod_{s != k} (1 - d_s))
//   p_O = d_k - p_T
// Throws ValidationError for S == 0 or an out-of-range target.
StnoMask ComputeStno(const DiarizationMatrix &diarization, int target_index);

ConditioningMask ReduceMask(const StnoMask &mask, MaskScheme scheme);

// Input-masking weights p_T + p_O (the target's own activity).
Eigen::RowVectorXd InputMaskWeights(const StnoMask &mask);

// Nearest-center resampling to new_num_frames columns (ties go to the
// earlier source frame); columns renormalized.
StnoMask ResampleMask(const StnoMask &mask, int new_num_frames);

// Export as a probability matrix with rows S, T, N, O.
DiarizationMatrix StnoToProbMatrix(const StnoMask &mask);

}  // namespace tsasr

#endif  // TSASR_STNO_MASK_H_
