// tsasr/tests/nnet_test.cc

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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tsasr/error.h"
#include "tsasr/nnet/grad_check.h"
#include "tsasr/nnet/ops.h"
#include "tsasr/nnet/tape.h"

namespace tsasr::nnet {
namespace {

Matrix Random(std::mt19937_64 &rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return Matrix::NullaryExpr(r, c, [&] { return n(rng); });
}

TEST(Ops, MatMulIdentity) {
  std::mt19937_64 rng(1);
  Tape tape;
  Matrix x = Random(rng, 3, 5);
  EXPECT_EQ(MatMul(tape.Constant(Matrix::Identity(3, 3)), tape.Constant(x)).value(), x);
}

TEST(Ops, LogSoftmaxUniform) {
  Tape tape;
  Var y = LogSoftmax(tape.Constant(Matrix::Constant(4, 2, 0.3)));
  EXPECT_LT((y.value().array() + std::log(4.0)).abs().maxCoeff(), 1e-12);
  EXPECT_NEAR(y.value()(0, 0), -1.3863, 1e-4);
}

TEST(Ops, LogSoftmaxColumnsNormalize) {
  std::mt19937_64 rng(2);
  Tape tape;
  Matrix y = LogSoftmax(tape.Constant(Random(rng, 7, 5, 10.0))).value();
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    EXPECT_NEAR(y.col(t).array().exp().sum(), 1.0, 1e-12);
  }
}

TEST(Ops, Conv1dStrideTwoHalvesFrames) {
  std::mt19937_64 rng(3);
  Tape tape;
  for (int T : {10, 11, 4, 1}) {
    Var y = Conv1d(tape.Constant(Random(rng, 2, T)), tape.Constant(Random(rng, 3, 6)),
                   tape.Constant(Random(rng, 3, 1)), 3, 2);
    EXPECT_EQ(y.cols(), (T + 1) / 2) << T;
    EXPECT_EQ(y.rows(), 3);
  }
}

TEST(Ops, Conv1dMatchesDirectSum) {
  std::mt19937_64 rng(4);
  Tape tape;
  Matrix x = Random(rng, 2, 7), w = Random(rng, 3, 6), b = Random(rng, 3, 1);
  Matrix y = Conv1d(tape.Constant(x), tape.Constant(w), tape.Constant(b), 3, 2).value();
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    Eigen::VectorXd want = b.col(0);
    for (int tap = 0; tap < 3; ++tap) {
      const Eigen::Index src = 2 * j + tap - 1;
      if (src < 0 || src >= x.cols()) continue;
      want += w.middleCols(tap * 2, 2) * x.col(src);
    }
    EXPECT_LT((y.col(j) - want).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Ops, AttentionRowsAreDistributions) {
  std::mt19937_64 rng(5);
  for (bool causal : {false, true}) {
    Matrix p = AttentionWeights(Random(rng, 4, 6, 3.0), Random(rng, 4, 6, 3.0), causal);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
      if (causal) {
        for (Eigen::Index j = i + 1; j < p.cols(); ++j) EXPECT_EQ(p(i, j), 0.0);
      }
    }
  }
}

TEST(Ops, ShapeErrorsNameTheOp) {
  Tape tape;
  try {
    MatMul(tape.Constant(Matrix::Zero(2, 3)), tape.Constant(Matrix::Zero(2, 3)));
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_NE(std::string(e.what()).find("matmul"), std::string::npos) << e.what();
  }
  EXPECT_THROW(Add(tape.Constant(Matrix::Zero(2, 3)), tape.Constant(Matrix::Zero(3, 2))),
               ValidationError);
}

TEST(Ops, NonFiniteValuesFailFast) {
  Tape tape;
  Matrix x = Matrix::Constant(1, 1, 1e300);
  try {
    Mul(tape.Constant(x), tape.Constant(x));
    FAIL();
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("mul"), std::string::npos) << e.what();
  }
}

TEST(Backward, SumOfProduct) {
  std::mt19937_64 rng(6);
  ParameterSet params;
  Parameter &w = params.Add("w", Random(rng, 3, 4));
  Matrix x = Random(rng, 4, 1);
  Tape tape;
  Var loss = Sum(MatMul(tape.Param(w), tape.Constant(x)));
  tape.Backward(loss);
  Matrix want = Matrix::Ones(3, 1) * x.transpose();
  EXPECT_LT((*tape.Grad(w) - want).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Backward, ZeroScaledLossGivesZeroGradients) {
  std::mt19937_64 rng(7);
  ParameterSet params;
  Parameter &w = params.Add("w", Random(rng, 3, 3));
  Tape tape;
  Var h = Gelu(MatMul(tape.Param(w), tape.Constant(Random(rng, 3, 2))));
  tape.Backward(Scale(Sum(h), 0.0));
  EXPECT_TRUE(tape.Grad(w)->isZero());
}

TEST(Backward, RejectsNonScalarLoss) {
  Tape tape;
  EXPECT_THROW(tape.Backward(tape.Constant(Matrix::Zero(2, 1))), ValidationError);
}

TEST(Backward, FrozenParameterGetsNoGradient) {
  ParameterSet params;
  Parameter &w = params.Add("w", Matrix::Ones(2, 2));
  w.requires_grad = false;
  Tape tape;
  tape.Backward(Sum(tape.Param(w)));
  EXPECT_EQ(tape.Grad(w), nullptr);
}

TEST(Backward, InferenceTapeRecordsNothing) {
  ParameterSet params;
  Parameter &w = params.Add("w", Matrix::Ones(2, 2));
  Tape tape(false);
  Var s = Sum(tape.Param(w));
  EXPECT_EQ(s.scalar(), 4.0);
  EXPECT_FALSE(tape.NeedsGrad(s));
}

ParameterSet Mlp(std::mt19937_64 &rng) {
  ParameterSet p;
  p.Add("w1", Random(rng, 6, 4, 0.5));
  p.Add("b1", Random(rng, 6, 1, 0.1));
  p.Add("w2", Random(rng, 5, 6, 0.5));
  p.Add("b2", Random(rng, 5, 1, 0.1));
  p.Add("w3", Random(rng, 3, 5, 0.5));
  p.Add("b3", Random(rng, 3, 1, 0.1));
  return p;
}

TEST(CheckGradients, ThreeLayerMlp) {
  std::mt19937_64 rng(8);
  ParameterSet p = Mlp(rng);
  Matrix x = Random(rng, 4, 7);
  auto report = CheckGradients(p, [&](Tape &t) {
    Var h = Gelu(AddBias(MatMul(t.Param(p.Get("w1")), t.Constant(x)), t.Param(p.Get("b1"))));
    h = Gelu(AddBias(MatMul(t.Param(p.Get("w2")), h), t.Param(p.Get("b2"))));
    h = LogSoftmax(AddBias(MatMul(t.Param(p.Get("w3")), h), t.Param(p.Get("b3"))));
    return Sum(SliceColumns(h, 1, 3));
  });
  EXPECT_TRUE(report.passed) << report.max_relative_error;
  EXPECT_EQ(report.coordinates, p.NumValues());
}

TEST(CheckGradients, Quadratic) {
  ParameterSet p;
  p.Add("theta", Matrix::Ones(1, 1));
  auto report = CheckGradients(p, [&](Tape &t) {
    Var th = t.Param(p.Get("theta"));
    return Sum(Mul(th, th));
  });
  EXPECT_LT(report.max_relative_error, 1e-9);
}

TEST(CheckGradients, FivePointStencilIsExactOnCubics) {
  ParameterSet p;
  p.Add("theta", Matrix::Ones(1, 1));
  auto cube = [&](Tape &t) {
    Var th = t.Param(p.Get("theta"));
    return Sum(Mul(Mul(th, th), th));
  };
  GradCheckOptions opts;
  opts.step = 0.1;
  // Two-point estimate for x^3 is 3 + h^2.
  EXPECT_NEAR(CheckGradients(p, cube, opts).max_relative_error, 0.01 / 3.01, 1e-9);
  opts.stencil = 4;
  EXPECT_LT(CheckGradients(p, cube, opts).max_relative_error, 1e-12);
  opts.stencil = 3;
  EXPECT_THROW(CheckGradients(p, cube, opts), ValidationError);
}

TEST(CheckGradients, ZeroThresholdFails) {
  std::mt19937_64 rng(9);
  ParameterSet p;
  p.Add("w", Random(rng, 3, 3));
  GradCheckOptions opts;
  opts.threshold = 0.0;
  auto report = CheckGradients(
      p, [&](Tape &t) { return Sum(Gelu(t.Param(p.Get("w")))); }, opts);
  EXPECT_FALSE(report.passed);
}

TEST(CheckGradients, EveryOpAgainstFiniteDifferences) {
  std::mt19937_64 rng(10);
  ParameterSet p;
  p.Add("x", Random(rng, 8, 6));
  p.Add("wq", Random(rng, 8, 8, 0.4));
  p.Add("wk", Random(rng, 8, 8, 0.4));
  p.Add("conv", Random(rng, 8, 24, 0.3));
  p.Add("cb", Random(rng, 8, 1, 0.1));
  p.Add("gain", Matrix::Ones(8, 1) + Random(rng, 8, 1, 0.1));
  p.Add("shift", Random(rng, 8, 1, 0.1));
  p.Add("table", Random(rng, 8, 5));
  p.Add("rs", Random(rng, 8, 1));
  p.Add("cs", Random(rng, 1, 6));
  const std::vector<int> ids{4, 0, 2, 2, 1, 3};
  for (bool causal : {false, true}) {
    GradCheckOptions opts;
    opts.max_coordinates = 300;
    auto report = CheckGradients(
        p,
        [&](Tape &t) {
          Var x = t.Param(p.Get("x"));
          Var e = Embedding(t.Param(p.Get("table")), ids);
          Var z = Add(x, ScaleColumns(e, t.Param(p.Get("cs"))));
          z = LayerNorm(z, t.Param(p.Get("gain")), t.Param(p.Get("shift")));
          Var q = MatMul(t.Param(p.Get("wq")), z);
          Var k = MatMulTN(t.Param(p.Get("wk")), z);
          Var a = MultiHeadAttention(q, k, z, 2, causal);
          Var c = Conv1d(Sub(a, ScaleRows(z, t.Param(p.Get("rs")))), t.Param(p.Get("conv")),
                         t.Param(p.Get("cb")), 3, 2);
          return Sum(Mul(LogSoftmax(c), Scale(Gelu(c), 0.5)));
        },
        opts);
    EXPECT_TRUE(report.passed) << report.max_relative_error;
    EXPECT_GE(report.coordinates, 200u);
  }
}

TEST(Determinism, ForwardAndBackwardBitIdentical) {
  auto run = [] {
    std::mt19937_64 rng(12);
    ParameterSet p = Mlp(rng);
    Matrix x = Random(rng, 4, 3);
    Tape t;
    Var h = Gelu(MatMul(t.Param(p.Get("w1")), t.Constant(x)));
    Var loss = Sum(LogSoftmax(MatMul(t.Param(p.Get("w2")), h)));
    t.Backward(loss);
    return std::make_pair(loss.scalar(), *t.Grad(p.Get("w1")));
  };
  auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

}  // namespace
}  // namespace tsasr::nnet
