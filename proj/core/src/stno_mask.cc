// tsasr/core/src/stno_mask.cc

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

#include "tsasr/stno_mask.h"

#include <cmath>
#include <string>

#include "tsasr/error.h"

namespace tsasr {

namespace {

constexpr double kSumTolerance = 1e-9;
constexpr double kClampTolerance = 1e-12;

double ClampRounding(double v, const char *what) {
  if (v >= 0.0) return v;
  if (v >= -kClampTolerance) return 0.0;
  throw NumericError(std::string("stno: negative probability for ") + what +
                     ": " + std::to_string(v));
}

}  // namespace

void StnoMask::Validate() const {
  for (Eigen::Index t = 0; t < values.cols(); ++t) {
    double sum = 0.0;
    for (int c = 0; c < kNumStnoClasses; ++c) {
      double v = values(c, t);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("stno mask: entry outside [0, 1] at frame " +
                              std::to_string(t));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ValidationError("stno mask: column " + std::to_string(t) +
                            " sums to " + std::to_string(sum));
    }
  }
}

MaskScheme ParseMaskScheme(std::string_view name) {
  if (name == "stno" || name == "STNO") return MaskScheme::kStno;
  if (name == "tno" || name == "TNO") return MaskScheme::kTno;
  if (name == "tn" || name == "TN") return MaskScheme::kTn;
  if (name == "t" || name == "T") return MaskScheme::kT;
  throw ValidationError("unknown mask scheme '" + std::string(name) + "'");
}

const char *MaskSchemeName(MaskScheme scheme) {
  switch (scheme) {
    case MaskScheme::kStno: return "stno";
    case MaskScheme::kTno: return "tno";
    case MaskScheme::kTn: return "tn";
    case MaskScheme::kT: return "t";
  }
  return "?";
}

void ConditioningMask::Validate() const {
  if (static_cast<Eigen::Index>(classes.size()) != class_weights.rows()) {
    throw ValidationError("conditioning mask: class list does not match rows");
  }
  if (class_weights.cols() != identity_weight.size()) {
    throw ValidationError("conditioning mask: length mismatch");
  }
  for (Eigen::Index t = 0; t < identity_weight.size(); ++t) {
    double sum = identity_weight(t);
    if (!(sum >= 0.0 && sum <= 1.0)) {
      throw ValidationError("conditioning mask: identity weight outside [0, 1]");
    }
    for (Eigen::Index k = 0; k < class_weights.rows(); ++k) {
      double v = class_weights(k, t);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("conditioning mask: weight outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw ValidationError("conditioning mask: column " + std::to_string(t) +
                            " has mass " + std::to_string(sum));
    }
  }
}

StnoMask ComputeStno(const DiarizationMatrix &diarization, int target_index) {
  const int num_speakers = diarization.num_speakers();
  if (num_speakers == 0) {
    throw ValidationError("compute_stno: diarization has no speakers");
  }
  if (target_index < 0 || target_index >= num_speakers) {
    throw ValidationError("compute_stno: target index " +
                          std::to_string(target_index) + " out of range [0, " +
                          std::to_string(num_speakers) + ")");
  }
  const int num_frames = diarization.num_frames();
  StnoMask mask;
  mask.target_index = target_index;
  mask.frame_rate = diarization.frame_rate;
  mask.values.resize(4, num_frames);
  for (int t = 0; t < num_frames; ++t) {
    const double target = diarization.values(target_index, t);
    double others_silent = 1.0;
    for (int s = 0; s < num_speakers; ++s) {
      if (s != target_index) others_silent *= 1.0 - diarization.values(s, t);
    }
    const double p_s = (1.0 - target) * others_silent;
    const double p_t = target * others_silent;
    // Product form of (1 - p_S) - d_k; never negative in floating point.
    const double p_n = (1.0 - target) * (1.0 - others_silent);
    const double p_o = ClampRounding(target - p_t, "overlap");
    mask.values(0, t) = ClampRounding(p_s, "silence");
    mask.values(1, t) = ClampRounding(p_t, "target");
    mask.values(2, t) = ClampRounding(p_n, "non-target");
    mask.values(3, t) = p_o;
  }
  return mask;
}

ConditioningMask ReduceMask(const StnoMask &mask, MaskScheme scheme) {
  const int num_frames = mask.num_frames();
  ConditioningMask out;
  out.scheme = scheme;
  const auto &v = mask.values;
  switch (scheme) {
    case MaskScheme::kStno:
      out.classes = {StnoClass::kSilence, StnoClass::kTarget,
                     StnoClass::kNonTarget, StnoClass::kOverlap};
      out.class_weights = v;
      out.identity_weight = Eigen::RowVectorXd::Zero(num_frames);
      break;
    case MaskScheme::kTno:
      out.classes = {StnoClass::kTarget, StnoClass::kNonTarget,
                     StnoClass::kOverlap};
      out.class_weights = v.bottomRows(3);
      out.identity_weight = v.row(0);
      break;
    case MaskScheme::kTn:
      out.classes = {StnoClass::kTarget, StnoClass::kNonTarget};
      out.class_weights.resize(2, num_frames);
      out.class_weights.row(0) = v.row(1) + v.row(3);
      out.class_weights.row(1) = v.row(2);
      out.identity_weight = v.row(0);
      break;
    case MaskScheme::kT:
      out.classes = {StnoClass::kTarget};
      out.class_weights.resize(1, num_frames);
      out.class_weights.row(0) = v.row(1) + v.row(3);
      out.identity_weight =
          Eigen::RowVectorXd::Ones(num_frames) - out.class_weights.row(0);
      break;
  }
  return out;
}

Eigen::RowVectorXd InputMaskWeights(const StnoMask &mask) {
  return mask.values.row(1) + mask.values.row(3);
}

StnoMask ResampleMask(const StnoMask &mask, int new_num_frames) {
  if (new_num_frames < 1) {
    throw ValidationError("resample_mask: new frame count must be >= 1");
  }
  const long long src = mask.num_frames();
  if (src < 1) throw ValidationError("resample_mask: empty mask");
  const long long dst = new_num_frames;
  StnoMask out;
  out.target_index = mask.target_index;
  out.frame_rate = mask.frame_rate * static_cast<double>(dst) /
                   static_cast<double>(src);
  out.values.resize(4, new_num_frames);
  for (long long t = 0; t < dst; ++t) {
    // Output center in source-frame units is c = (t + 0.5) * src / dst; the
    // nearest source center i + 0.5 (ties to lower i) is i = ceil(c - 1),
    // evaluated exactly as ceil(((2t + 1) * src - 2 * dst) / (2 * dst)).
    long long num = (2 * t + 1) * src - 2 * dst;
    long long den = 2 * dst;
    long long idx = num >= 0 ? (num + den - 1) / den : -((-num) / den);
    if (idx < 0) idx = 0;
    if (idx > src - 1) idx = src - 1;
    auto column = mask.values.col(static_cast<Eigen::Index>(idx));
    const double sum = column.sum();
    out.values.col(static_cast<Eigen::Index>(t)) = column / sum;
  }
  return out;
}

DiarizationMatrix StnoToProbMatrix(const StnoMask &mask) {
  DiarizationMatrix m;
  m.speaker_ids = {"S", "T", "N", "O"};
  m.frame_rate = mask.frame_rate;
  m.values = mask.values;
  return m;
}

}  // namespace tsasr
