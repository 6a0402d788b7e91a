// tsasr/core/src/nnet/ops.cc

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

#include "tsasr/nnet/ops.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "tsasr/error.h"

namespace tsasr::nnet {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

std::string Shape(const Matrix &m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void ShapeError(const char *op, const Matrix &a, const Matrix &b) {
  throw ValidationError(std::string(op) + ": incompatible shapes " + Shape(a) +
                        " and " + Shape(b));
}

Tape &TapeOf(const char *op, Var v) {
  if (!v.valid()) throw ValidationError(std::string(op) + ": null operand");
  return *v.tape();
}

}  // namespace

Var MatMul(Var a, Var b) {
  Tape &tape = TapeOf("matmul", a);
  const Matrix &av = a.value(), &bv = b.value();
  if (av.cols() != bv.rows()) ShapeError("matmul", av, bv);
  Matrix out(av.rows(), bv.cols());
  out.noalias() = av * bv;
  const int ia = a.id(), ib = b.id();
  return tape.Record("matmul", std::move(out), {a, b}, [ia, ib](Tape &t, int n) {
    const Matrix &g = t.GradOf(n);
    if (t.NeedsGrad(ia)) t.GradRef(ia).noalias() += g * t.Value(ib).transpose();
    if (t.NeedsGrad(ib)) t.GradRef(ib).noalias() += t.Value(ia).transpose() * g;
  });
}

Var MatMulTN(Var a, Var b) {
  Tape &tape = TapeOf("matmul_tn", a);
  const Matrix &av = a.value(), &bv = b.value();
  if (av.rows() != bv.rows()) ShapeError("matmul_tn", av, bv);
  Matrix out(av.cols(), bv.cols());
  out.noalias() = av.transpose() * bv;
  const int ia = a.id(), ib = b.id();
  return tape.Record("matmul_tn", std::move(out), {a, b},
                     [ia, ib](Tape &t, int n) {
                       const Matrix &g = t.GradOf(n);
                       if (t.NeedsGrad(ia))
                         t.GradRef(ia).noalias() += t.Value(ib) * g.transpose();
                       if (t.NeedsGrad(ib))
                         t.GradRef(ib).noalias() += t.Value(ia) * g;
                     });
}

Var Add(Var a, Var b) {
  Tape &tape = TapeOf("add", a);
  const Matrix &av = a.value(), &bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) ShapeError("add", av, bv);
  const int ia = a.id(), ib = b.id();
  return tape.Record("add", av + bv, {a, b}, [ia, ib](Tape &t, int n) {
    const Matrix &g = t.GradOf(n);
    if (t.NeedsGrad(ia)) t.GradRef(ia) += g;
    if (t.NeedsGrad(ib)) t.GradRef(ib) += g;
  });
}

Var Sub(Var a, Var b) {
  Tape &tape = TapeOf("sub", a);
  const Matrix &av = a.value(), &bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) ShapeError("sub", av, bv);
  const int ia = a.id(), ib = b.id();
  return tape.Record("sub", av - bv, {a, b}, [ia, ib](Tape &t, int n) {
    const Matrix &g = t.GradOf(n);
    if (t.NeedsGrad(ia)) t.GradRef(ia) += g;
    if (t.NeedsGrad(ib)) t.GradRef(ib) -= g;
  });
}

Var Mul(Var a, Var b) {
  Tape &tape = TapeOf("mul", a);
  const Matrix &av = a.value(), &bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) ShapeError("mul", av, bv);
  const int ia = a.id(), ib = b.id();
  return tape.Record("mul", av.cwiseProduct(bv), {a, b}, [ia, ib](Tape &t, int n) {
    const Matrix &g = t.GradOf(n);
    if (t.NeedsGrad(ia)) t.GradRef(ia) += g.cwiseProduct(t.Value(ib));
    if (t.NeedsGrad(ib)) t.GradRef(ib) += g.cwiseProduct(t.Value(ia));
  });
}

Var Scale(Var x, double factor) {
  Tape &tape = TapeOf("scale", x);
  const int ix = x.id();
  return tape.Record("scale", x.value() * factor, {x}, [ix, factor](Tape &t, int n) {
    if (t.NeedsGrad(ix)) t.GradRef(ix) += t.GradOf(n) * factor;
  });
}

Var AddBias(Var x, Var bias) {
  Tape &tape = TapeOf("add_bias", x);
  const Matrix &xv = x.value(), &bv = bias.value();
  if (bv.cols() != 1 || bv.rows() != xv.rows()) ShapeError("add_bias", xv, bv);
  Matrix out = xv;
  out.colwise() += bv.col(0);
  const int ix = x.id(), ib = bias.id();
  return tape.Record("add_bias", std::move(out), {x, bias},
                     [ix, ib](Tape &t, int n) {
                       const Matrix &g = t.GradOf(n);
                       if (t.NeedsGrad(ix)) t.GradRef(ix) += g;
                       if (t.NeedsGrad(ib)) t.GradRef(ib) += g.rowwise().sum();
                     });
}

Var ScaleRows(Var x, Var scale) {
  Tape &tape = TapeOf("scale_rows", x);
  const Matrix &xv = x.value(), &sv = scale.value();
  if (sv.cols() != 1 || sv.rows() != xv.rows()) ShapeError("scale_rows", xv, sv);
  Matrix out = sv.col(0).asDiagonal() * xv;
  const int ix = x.id(), is = scale.id();
  return tape.Record("scale_rows", std::move(out), {x, scale},
                     [ix, is](Tape &t, int n) {
                       const Matrix &g = t.GradOf(n);
                       if (t.NeedsGrad(ix))
                         t.GradRef(ix) += t.Value(is).col(0).asDiagonal() * g;
                       if (t.NeedsGrad(is))
                         t.GradRef(is) +=
                             g.cwiseProduct(t.Value(ix)).rowwise().sum();
                     });
}

Var ScaleColumns(Var x, Var weights) {
  Tape &tape = TapeOf("scale_columns", x);
  const Matrix &xv = x.value(), &wv = weights.value();
  if (wv.rows() != 1 || wv.cols() != xv.cols()) {
    ShapeError("scale_columns", xv, wv);
  }
  Matrix out = xv * wv.row(0).asDiagonal();
  const int ix = x.id(), iw = weights.id();
  return tape.Record("scale_columns", std::move(out), {x, weights},
                     [ix, iw](Tape &t, int n) {
                       const Matrix &g = t.GradOf(n);
                       if (t.NeedsGrad(ix))
                         t.GradRef(ix) += g * t.Value(iw).row(0).asDiagonal();
                       if (t.NeedsGrad(iw))
                         t.GradRef(iw) +=
                             g.cwiseProduct(t.Value(ix)).colwise().sum();
                     });
}

Var SliceColumns(Var x, Eigen::Index start, Eigen::Index count) {
  Tape &tape = TapeOf("slice_columns", x);
  const Matrix &xv = x.value();
  if (start < 0 || count < 0 || start + count > xv.cols()) {
    throw ValidationError("slice_columns: range [" + std::to_string(start) +
                          ", " + std::to_string(start + count) +
                          ") outside " + Shape(xv));
  }
  const int ix = x.id();
  return tape.Record("slice_columns", xv.middleCols(start, count), {x},
                     [ix, start, count](Tape &t, int n) {
                       if (t.NeedsGrad(ix))
                         t.GradRef(ix).middleCols(start, count) += t.GradOf(n);
                     });
}

Var Sum(Var x) {
  Tape &tape = TapeOf("sum", x);
  Matrix out(1, 1);
  out(0, 0) = x.value().sum();
  const int ix = x.id();
  return tape.Record("sum", std::move(out), {x}, [ix](Tape &t, int n) {
    if (t.NeedsGrad(ix)) t.GradRef(ix).array() += t.GradOf(n)(0, 0);
  });
}

Var Gelu(Var x) {
  Tape &tape = TapeOf("gelu", x);
  const Matrix &xv = x.value();
  Matrix out = xv.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  });
  const int ix = x.id();
  return tape.Record("gelu", std::move(out), {x}, [ix](Tape &t, int n) {
    if (!t.NeedsGrad(ix)) return;
    const Matrix &xv = t.Value(ix);
    Matrix d = xv.unaryExpr([](double v) {
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf =
          std::exp(-0.5 * v * v) * std::numbers::inv_sqrtpi * kInvSqrt2;
      return cdf + v * pdf;
    });
    t.GradRef(ix) += t.GradOf(n).cwiseProduct(d);
  });
}

Var LayerNorm(Var x, Var gain, Var shift, double epsilon) {
  Tape &tape = TapeOf("layer_norm", x);
  const Matrix &xv = x.value();
  const Eigen::Index d = xv.rows(), num_frames = xv.cols();
  if (gain.rows() != d || gain.cols() != 1 || shift.rows() != d ||
      shift.cols() != 1) {
    ShapeError("layer_norm", xv, gain.value());
  }
  Matrix normalized(d, num_frames);
  Eigen::RowVectorXd inv_std(num_frames);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const double mean = xv.col(t).mean();
    const double var = (xv.col(t).array() - mean).square().mean();
    inv_std(t) = 1.0 / std::sqrt(var + epsilon);
    normalized.col(t) = (xv.col(t).array() - mean) * inv_std(t);
  }
  Matrix out = gain.value().col(0).asDiagonal() * normalized;
  out.colwise() += shift.value().col(0);
  const int ix = x.id(), ig = gain.id(), is = shift.id();
  return tape.Record(
      "layer_norm", std::move(out), {x, gain, shift},
      [ix, ig, is, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Tape &t, int n) {
        const Matrix &g = t.GradOf(n);
        if (t.NeedsGrad(ig))
          t.GradRef(ig) += g.cwiseProduct(normalized).rowwise().sum();
        if (t.NeedsGrad(is)) t.GradRef(is) += g.rowwise().sum();
        if (!t.NeedsGrad(ix)) return;
        Matrix dn = t.Value(ig).col(0).asDiagonal() * g;
        Matrix &gx = t.GradRef(ix);
        for (Eigen::Index c = 0; c < dn.cols(); ++c) {
          const double mean_dn = dn.col(c).mean();
          const double mean_dn_n = dn.col(c).dot(normalized.col(c)) /
                                   static_cast<double>(dn.rows());
          gx.col(c).array() += inv_std(c) * (dn.col(c).array() - mean_dn -
                                             normalized.col(c).array() * mean_dn_n);
        }
      });
}

Matrix AttentionWeights(const Matrix &q_head, const Matrix &k_head,
                        bool causal) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(q_head.rows()));
  Matrix scores(q_head.cols(), k_head.cols());
  scores.noalias() = q_head.transpose() * k_head;
  scores *= scale;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index visible = causal ? std::min(i + 1, scores.cols()) : scores.cols();
    double max_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < visible; ++j) {
      max_score = std::max(max_score, scores(i, j));
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      double p = j < visible ? std::exp(scores(i, j) - max_score) : 0.0;
      scores(i, j) = p;
      total += p;
    }
    scores.row(i) /= total;
  }
  return scores;
}

Var MultiHeadAttention(Var q, Var k, Var v, int heads, bool causal) {
  Tape &tape = TapeOf("attention", q);
  const Matrix &qv = q.value(), &kv = k.value(), &vv = v.value();
  const Eigen::Index d = qv.rows();
  if (heads < 1 || d % heads != 0) {
    throw ValidationError("attention: dimension " + std::to_string(d) +
                          " not divisible by " + std::to_string(heads) +
                          " heads");
  }
  if (kv.rows() != d || vv.rows() != d) ShapeError("attention", qv, kv);
  if (kv.cols() != vv.cols()) ShapeError("attention", kv, vv);
  if (kv.cols() == 0) throw ValidationError("attention: no keys");
  const Eigen::Index dh = d / heads;
  std::vector<Matrix> weights(static_cast<std::size_t>(heads));
  Matrix out(d, qv.cols());
  for (int h = 0; h < heads; ++h) {
    auto &p = weights[static_cast<std::size_t>(h)];
    p = AttentionWeights(qv.middleRows(h * dh, dh), kv.middleRows(h * dh, dh),
                         causal);
    out.middleRows(h * dh, dh).noalias() =
        vv.middleRows(h * dh, dh) * p.transpose();
  }
  const int iq = q.id(), ik = k.id(), iv = v.id();
  return tape.Record(
      "attention", std::move(out), {q, k, v},
      [iq, ik, iv, heads, dh, weights = std::move(weights)](Tape &t, int n) {
        const Matrix &g = t.GradOf(n);
        const Matrix &qv = t.Value(iq), &kv = t.Value(ik), &vv = t.Value(iv);
        const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
        for (int h = 0; h < heads; ++h) {
          const Matrix &p = weights[static_cast<std::size_t>(h)];
          auto g_h = g.middleRows(h * dh, dh);
          if (t.NeedsGrad(iv)) t.GradRef(iv).middleRows(h * dh, dh).noalias() += g_h * p;
          if (!t.NeedsGrad(iq) && !t.NeedsGrad(ik)) continue;
          Matrix dp(p.rows(), p.cols());
          dp.noalias() = g_h.transpose() * vv.middleRows(h * dh, dh);
          Eigen::VectorXd row_dot = dp.cwiseProduct(p).rowwise().sum();
          Matrix ds = p.cwiseProduct(dp.colwise() - row_dot) * scale;
          if (t.NeedsGrad(iq))
            t.GradRef(iq).middleRows(h * dh, dh).noalias() +=
                kv.middleRows(h * dh, dh) * ds.transpose();
          if (t.NeedsGrad(ik))
            t.GradRef(ik).middleRows(h * dh, dh).noalias() +=
                qv.middleRows(h * dh, dh) * ds;
        }
      });
}

Var Conv1d(Var x, Var weight, Var bias, int kernel, int stride) {
  Tape &tape = TapeOf("conv1d", x);
  const Matrix &xv = x.value(), &wv = weight.value();
  if (kernel < 1 || stride < 1) {
    throw ValidationError("conv1d: kernel and stride must be positive");
  }
  const Eigen::Index in_ch = xv.rows(), num_frames = xv.cols();
  if (wv.cols() != kernel * in_ch) ShapeError("conv1d", xv, wv);
  if (bias.rows() != wv.rows() || bias.cols() != 1) {
    ShapeError("conv1d", wv, bias.value());
  }
  const Eigen::Index pad = kernel / 2;
  const Eigen::Index padded = num_frames + 2 * pad - kernel;
  if (padded < 0) {
    throw ValidationError("conv1d: " + std::to_string(num_frames) +
                          " frames too short for kernel " +
                          std::to_string(kernel));
  }
  const Eigen::Index out_frames = padded / stride + 1;
  Matrix columns = Matrix::Zero(kernel * in_ch, out_frames);
  for (Eigen::Index j = 0; j < out_frames; ++j) {
    for (int tap = 0; tap < kernel; ++tap) {
      const Eigen::Index src = j * stride + tap - pad;
      if (src >= 0 && src < num_frames) {
        columns.block(tap * in_ch, j, in_ch, 1) = xv.col(src);
      }
    }
  }
  Matrix out(wv.rows(), out_frames);
  out.noalias() = wv * columns;
  out.colwise() += bias.value().col(0);
  const int ix = x.id(), iw = weight.id(), ib = bias.id();
  return tape.Record(
      "conv1d", std::move(out), {x, weight, bias},
      [ix, iw, ib, kernel, stride, pad, in_ch, num_frames,
       columns = std::move(columns)](Tape &t, int n) {
        const Matrix &g = t.GradOf(n);
        if (t.NeedsGrad(iw)) t.GradRef(iw).noalias() += g * columns.transpose();
        if (t.NeedsGrad(ib)) t.GradRef(ib) += g.rowwise().sum();
        if (!t.NeedsGrad(ix)) return;
        Matrix dcols(columns.rows(), columns.cols());
        dcols.noalias() = t.Value(iw).transpose() * g;
        Matrix &gx = t.GradRef(ix);
        for (Eigen::Index j = 0; j < dcols.cols(); ++j) {
          for (int tap = 0; tap < kernel; ++tap) {
            const Eigen::Index src = j * stride + tap - pad;
            if (src >= 0 && src < num_frames) {
              gx.col(src) += dcols.block(tap * in_ch, j, in_ch, 1);
            }
          }
        }
      });
}

Var Embedding(Var table, std::span<const int> ids) {
  Tape &tape = TapeOf("embedding", table);
  const Matrix &tv = table.value();
  Matrix out(tv.rows(), static_cast<Eigen::Index>(ids.size()));
  std::vector<int> id_copy(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.cols()) {
      throw ValidationError("embedding: id " + std::to_string(ids[i]) +
                            " outside table of " + std::to_string(tv.cols()));
    }
    out.col(static_cast<Eigen::Index>(i)) = tv.col(ids[i]);
  }
  const int it = table.id();
  return tape.Record("embedding", std::move(out), {table},
                     [it, id_copy = std::move(id_copy)](Tape &t, int n) {
                       if (!t.NeedsGrad(it)) return;
                       const Matrix &g = t.GradOf(n);
                       Matrix &gt = t.GradRef(it);
                       for (std::size_t i = 0; i < id_copy.size(); ++i) {
                         gt.col(id_copy[i]) += g.col(static_cast<Eigen::Index>(i));
                       }
                     });
}

Var LogSoftmax(Var x) {
  Tape &tape = TapeOf("log_softmax", x);
  const Matrix &xv = x.value();
  Matrix out(xv.rows(), xv.cols());
  for (Eigen::Index c = 0; c < xv.cols(); ++c) {
    const double max_v = xv.col(c).maxCoeff();
    const double lse =
        max_v + std::log((xv.col(c).array() - max_v).exp().sum());
    out.col(c) = xv.col(c).array() - lse;
  }
  const int ix = x.id();
  return tape.Record("log_softmax", std::move(out), {x}, [ix](Tape &t, int n) {
    if (!t.NeedsGrad(ix)) return;
    const Matrix &g = t.GradOf(n);
    const Matrix &y = t.Value(n);
    Eigen::RowVectorXd col_sum = g.colwise().sum();
    t.GradRef(ix) += g - (y.array().exp().matrix() * col_sum.asDiagonal());
  });
}

}  // namespace tsasr::nnet
