// tsasr/tests/stno_mask_test.cc

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

#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "tsasr/error.h"
#include "tsasr/stno_mask.h"

namespace tsasr {
namespace {

DiarizationMatrix Column(std::vector<double> d) {
  DiarizationMatrix m;
  for (std::size_t s = 0; s < d.size(); ++s) m.speaker_ids.push_back("s" + std::to_string(s));
  m.frame_rate = 1.0;
  m.values = Eigen::Map<Eigen::MatrixXd>(d.data(), static_cast<Eigen::Index>(d.size()), 1);
  return m;
}

void ExpectColumn(const StnoMask &mask, int t, std::array<double, 4> want, double tol) {
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(mask.values(c, t), want[c], tol) << "class " << c;
}

TEST(ComputeStno, HandExamples) {
  ExpectColumn(ComputeStno(Column({1, 0}), 0), 0, {0, 1, 0, 0}, 0);
  ExpectColumn(ComputeStno(Column({1, 1}), 0), 0, {0, 0, 0, 1}, 0);
}

TEST(ComputeStno, EnumerationExamples) {
  for (std::vector<double> d : {std::vector<double>{0.5, 0.5}, {0.0, 0.5, 1.0}}) {
    const auto want = testing::EnumerateStno(d, 0);
    ExpectColumn(ComputeStno(Column(d), 0), 0, want, 1e-12);
  }
  ExpectColumn(ComputeStno(Column({0.5, 0.5}), 0), 0, {0.25, 0.25, 0.25, 0.25}, 1e-12);
  ExpectColumn(ComputeStno(Column({0.0, 0.5, 1.0}), 0), 0, {0, 0, 1, 0}, 1e-12);
}

TEST(ComputeStno, Errors) {
  EXPECT_THROW(ComputeStno(Column({0.5}), 1), ValidationError);
  EXPECT_THROW(ComputeStno(Column({0.5}), -1), ValidationError);
  DiarizationMatrix empty;
  empty.frame_rate = 1.0;
  empty.values.resize(0, 3);
  EXPECT_THROW(ComputeStno(empty, 0), ValidationError);
}

TEST(ComputeStno, MatchesEnumerationOracle) {
  std::mt19937_64 rng(11);
  for (int draw = 0; draw < 1000; ++draw) {
    const int S = 1 + static_cast<int>(rng() % 6);
    const int T = 1 + static_cast<int>(rng() % 20);
    DiarizationMatrix d = testing::RandomDiarization(rng, S, T);
    const int k = static_cast<int>(rng() % S);
    StnoMask mask = ComputeStno(d, k);
    for (int t = 0; t < T; ++t) {
      std::vector<double> col(d.values.col(t).data(), d.values.col(t).data() + S);
      const auto want = testing::EnumerateStno(col, k);
      for (int c = 0; c < 4; ++c) ASSERT_NEAR(mask.values(c, t), want[c], 1e-9);
      ASSERT_NEAR(mask.values.col(t).sum(), 1.0, 1e-9);
      ASSERT_TRUE((mask.values.col(t).array() >= 0.0).all());
      // Target marginal.
      ASSERT_NEAR(mask.p(StnoClass::kTarget, t) + mask.p(StnoClass::kOverlap, t),
                  d.values(k, t), 1e-15);
      ASSERT_LE(mask.p(StnoClass::kOverlap, t), d.values(k, t));
    }
  }
}

TEST(ComputeStno, BinaryInputGivesOneHot) {
  std::mt19937_64 rng(2);
  for (int draw = 0; draw < 200; ++draw) {
    DiarizationMatrix d;
    const int S = 1 + static_cast<int>(rng() % 5);
    for (int s = 0; s < S; ++s) d.speaker_ids.push_back(std::to_string(s));
    d.frame_rate = 1.0;
    d.values = Eigen::MatrixXd::NullaryExpr(S, 8, [&] { return double(rng() % 2); });
    StnoMask mask = ComputeStno(d, static_cast<int>(rng() % S));
    for (int t = 0; t < 8; ++t) {
      EXPECT_EQ((mask.values.col(t).array() == 1.0).count(), 1);
      EXPECT_EQ((mask.values.col(t).array() == 0.0).count(), 3);
    }
  }
}

StnoMask OneFrame(std::array<double, 4> p) {
  StnoMask m;
  m.values.resize(4, 1);
  for (int c = 0; c < 4; ++c) m.values(c, 0) = p[c];
  return m;
}

TEST(ReduceMask, Semantics) {
  ConditioningMask tno = ReduceMask(OneFrame({1, 0, 0, 0}), MaskScheme::kTno);
  EXPECT_EQ(tno.class_weights.rows(), 3);
  EXPECT_TRUE((tno.class_weights.array() == 0.0).all());
  EXPECT_EQ(tno.identity_weight(0), 1.0);

  ConditioningMask t = ReduceMask(OneFrame({0.25, 0.25, 0.25, 0.25}), MaskScheme::kT);
  EXPECT_EQ(t.class_weights.rows(), 1);
  EXPECT_DOUBLE_EQ(t.class_weights(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(t.identity_weight(0), 0.5);

  StnoMask q = OneFrame({0.1, 0.2, 0.3, 0.4});
  ConditioningMask stno = ReduceMask(q, MaskScheme::kStno);
  EXPECT_EQ(stno.class_weights, Eigen::MatrixXd(q.values));
  EXPECT_EQ(stno.identity_weight(0), 0.0);

  ConditioningMask tn = ReduceMask(q, MaskScheme::kTn);
  ASSERT_EQ(tn.classes, (std::vector<StnoClass>{StnoClass::kTarget, StnoClass::kNonTarget}));
  EXPECT_DOUBLE_EQ(tn.class_weights(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(tn.class_weights(1, 0), 0.3);
  EXPECT_DOUBLE_EQ(tn.identity_weight(0), 0.1);
}

TEST(ReduceMask, ConservesMass) {
  std::mt19937_64 rng(4);
  for (int draw = 0; draw < 200; ++draw) {
    StnoMask mask = ComputeStno(testing::RandomDiarization(rng, 3, 10), 1);
    for (MaskScheme s : {MaskScheme::kStno, MaskScheme::kTno, MaskScheme::kTn, MaskScheme::kT}) {
      ConditioningMask c = ReduceMask(mask, s);
      Eigen::RowVectorXd total = c.identity_weight + c.class_weights.colwise().sum();
      EXPECT_LT((total.array() - 1.0).abs().maxCoeff(), 1e-9);
      EXPECT_GE(c.class_weights.minCoeff(), 0.0);
      EXPECT_GE(c.identity_weight.minCoeff(), 0.0);
    }
  }
}

TEST(MaskScheme, Names) {
  for (MaskScheme s : {MaskScheme::kStno, MaskScheme::kTno, MaskScheme::kTn, MaskScheme::kT}) {
    EXPECT_EQ(ParseMaskScheme(MaskSchemeName(s)), s);
  }
  EXPECT_THROW(ParseMaskScheme("sto"), ValidationError);
}

TEST(InputMaskWeights, Examples) {
  EXPECT_EQ(InputMaskWeights(OneFrame({0, 1, 0, 0}))(0), 1.0);
  EXPECT_EQ(InputMaskWeights(OneFrame({1, 0, 0, 0}))(0), 0.0);
  EXPECT_EQ(InputMaskWeights(OneFrame({0.25, 0.25, 0.25, 0.25}))(0), 0.5);
}

StnoMask Frames(int T) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(T));
  return ComputeStno(testing::RandomDiarization(rng, 2, T), 0);
}

TEST(ResampleMask, Upsample) {
  StnoMask m = Frames(2);
  StnoMask r = ResampleMask(m, 4);
  ASSERT_EQ(r.num_frames(), 4);
  for (int t = 0; t < 4; ++t) {
    EXPECT_LT((r.values.col(t) - m.values.col(t / 2)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ResampleMask, IdentityAtSameLength) {
  StnoMask m = Frames(7);
  EXPECT_LT((ResampleMask(m, 7).values - m.values).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ResampleMask, DownsampleNearestCenter) {
  StnoMask m = Frames(4);
  StnoMask r = ResampleMask(m, 2);
  EXPECT_LT((r.values.col(0) - m.values.col(0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((r.values.col(1) - m.values.col(2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ResampleMask, ColumnsStayStochastic) {
  StnoMask m = Frames(13);
  for (int n : {1, 3, 5, 13, 26, 40}) {
    StnoMask r = ResampleMask(m, n);
    EXPECT_NO_THROW(r.Validate());
  }
}

TEST(StnoToProbMatrix, RoundTripsThroughText) {
  StnoMask m = Frames(5);
  m.frame_rate = 25.0;
  DiarizationMatrix p = LoadProbMatrix(WriteProbMatrix(StnoToProbMatrix(m)));
  EXPECT_EQ(p.speaker_ids, (std::vector<std::string>{"S", "T", "N", "O"}));
  EXPECT_EQ(p.values, Eigen::MatrixXd(m.values));
}

}  // namespace
}  // namespace tsasr
