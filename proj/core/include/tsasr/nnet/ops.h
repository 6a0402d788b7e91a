// tsasr/core/include/tsasr/nnet/ops.h

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

#ifndef TSASR_NNET_OPS_H_
#define TSASR_NNET_OPS_H_

#include <span>

#include "tsasr/nnet/tape.h"

namespace tsasr::nnet {

// All ops throw ValidationError naming the op and the offending shapes.

Var MatMul(Var a, Var b);    // a * b
Var MatMulTN(Var a, Var b);  // a^T * b
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);            // elementwise
Var Scale(Var x, double factor);
Var AddBias(Var x, Var bias);      // bias is rows(x) x 1, broadcast over columns
Var ScaleRows(Var x, Var scale);   // diag(scale) * x, scale is rows(x) x 1
Var ScaleColumns(Var x, Var weights);  // x * diag(weights), weights is 1 x cols(x)
Var SliceColumns(Var x, Eigen::Index start, Eigen::Index count);
Var Sum(Var x);  // 1 x 1

Var Gelu(Var x);  // exact erf form

// Per-column normalization with learned gain and shift (both rows(x) x 1).
Var LayerNorm(Var x, Var gain, Var shift, double epsilon = 1e-5);

// Scaled dot-product attention over `heads` equal slices of the feature
// axis. q is d x Tq, k and v are d x Tk. With `causal`, query i only sees
// keys j <= i.
Var MultiHeadAttention(Var q, Var k, Var v, int heads, bool causal);

// Row-softmax attention weights (Tq x Tk) for one head; exposed for tests.
Matrix AttentionWeights(const Matrix &q_head, const Matrix &k_head,
                        bool causal);

// 1-D convolution over frames with zero padding kernel / 2 on both sides.
// weight is out_channels x (kernel * in_channels), taps stacked
// tap-major. Output has floor((T + 2 * (kernel / 2) - kernel) / stride) + 1
// frames, which is ceil(T / 2) for kernel 3 and stride 2.
Var Conv1d(Var x, Var weight, Var bias, int kernel, int stride);

// Columns of `table` (d x V) selected by ids.
Var Embedding(Var table, std::span<const int> ids);

Var LogSoftmax(Var x);  // per column

}  // namespace tsasr::nnet

#endif  // TSASR_NNET_OPS_H_
