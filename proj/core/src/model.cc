// tsasr/core/src/model.cc

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

#include "tsasr/model.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "tsasr/error.h"
#include "tsasr/losses.h"
#include "tsasr/nnet/ops.h"

namespace tsasr {

using nnet::Matrix;
using nnet::Tape;
using nnet::Var;

Vocabulary::Vocabulary() : tokens_{"<blank>", "<bos>", "<eos>", "<pad>"} {}

Vocabulary Vocabulary::Synthetic(int num_content_tokens) {
  std::vector<std::string> content;
  for (int i = 0; i < num_content_tokens; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%02d", i);
    content.emplace_back(buf);
  }
  return FromContentTokens(std::move(content));
}

Vocabulary Vocabulary::FromContentTokens(std::vector<std::string> content) {
  Vocabulary v;
  for (std::string &token : content) {
    if (v.Id(token) >= 0) {
      throw ValidationError("vocabulary: duplicate token '" + token + "'");
    }
    v.tokens_.push_back(std::move(token));
  }
  return v;
}

int Vocabulary::Id(std::string_view token) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i] == token) return static_cast<int>(i);
  }
  return -1;
}

std::vector<int> Vocabulary::Encode(std::span<const std::string> words) const {
  std::vector<int> ids;
  ids.reserve(words.size());
  for (const std::string &w : words) {
    const int id = Id(w);
    if (id < kNumSpecial) {
      throw ValidationError("vocabulary: unknown word '" + w + "'");
    }
    ids.push_back(id);
  }
  return ids;
}

std::vector<std::string> Vocabulary::Decode(std::span<const int> ids) const {
  std::vector<std::string> words;
  for (int id : ids) {
    if (id >= kNumSpecial && id < size()) words.push_back(Token(id));
  }
  return words;
}

Conditioning ParseConditioning(std::string_view name) {
  if (name == "fddt") return Conditioning::kFddt;
  if (name == "input_mask" || name == "inputmask") return Conditioning::kInputMask;
  if (name == "none") return Conditioning::kNone;
  throw ValidationError("unknown conditioning '" + std::string(name) + "'");
}

const char *ConditioningName(Conditioning c) {
  switch (c) {
    case Conditioning::kFddt: return "fddt";
    case Conditioning::kInputMask: return "input_mask";
    case Conditioning::kNone: return "none";
  }
  return "?";
}

DecodeMode ParseDecodeMode(std::string_view name) {
  if (name == "ctc") return DecodeMode::kCtc;
  if (name == "attention") return DecodeMode::kAttention;
  throw ValidationError("unknown decode mode '" + std::string(name) + "'");
}

const char *DecodeModeName(DecodeMode mode) {
  return mode == DecodeMode::kCtc ? "ctc" : "attention";
}

void ModelConfig::Validate() const {
  if (d_m < 1 || heads < 1 || d_m % heads != 0) {
    throw ValidationError("model: d_m must be a positive multiple of heads");
  }
  if (encoder_layers < 1) throw ValidationError("model: need an encoder layer");
  if (feature_dim < 1) throw ValidationError("model: feature_dim must be positive");
  if (ffn_mult < 1) throw ValidationError("model: ffn_mult must be positive");
  if (max_frames < 4) throw ValidationError("model: max_frames must be >= 4");
  if (max_decode_len < 1) throw ValidationError("model: max_decode_len must be positive");
  if (vocab.num_content() < 1) throw ValidationError("model: empty vocabulary");
  if (!(ctc_weight >= 0.0 && ctc_weight <= 1.0)) {
    throw ValidationError("model: ctc_weight must lie in [0, 1]");
  }
  if (fddt.model_dim != d_m) {
    throw ValidationError("model: fddt.model_dim must equal d_m");
  }
  fddt.Validate(encoder_layers);
}

namespace {

class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}

  Matrix Normal(Eigen::Index rows, Eigen::Index cols, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng_);
    return m;
  }
  // Weight of a linear map with `fan_in` inputs.
  Matrix Linear(Eigen::Index out, Eigen::Index fan_in) {
    return Normal(out, fan_in, 1.0 / std::sqrt(static_cast<double>(fan_in)));
  }

 private:
  std::mt19937_64 rng_;
};

Matrix Sinusoid(int dim, int length) {
  Matrix pos(dim, length);
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < dim; ++i) {
      const double rate =
          std::pow(10000.0, -static_cast<double>(i / 2 * 2) / static_cast<double>(dim));
      pos(i, t) = (i % 2 == 0) ? std::sin(t * rate) : std::cos(t * rate);
    }
  }
  return pos;
}

void AddLayerNorm(nnet::ParameterSet &p, const std::string &name, int d) {
  p.Add(name + ".gain", Matrix::Ones(d, 1));
  p.Add(name + ".shift", Matrix::Zero(d, 1));
}

void AddLinear(nnet::ParameterSet &p, Initializer &init, const std::string &name,
               int out, int in) {
  p.Add(name + ".weight", init.Linear(out, in));
  p.Add(name + ".bias", Matrix::Zero(out, 1));
}

void AddAttention(nnet::ParameterSet &p, Initializer &init,
                  const std::string &name, int d) {
  AddLinear(p, init, name + ".q", d, d);
  p.Add(name + ".k.weight", init.Linear(d, d));
  AddLinear(p, init, name + ".v", d, d);
  AddLinear(p, init, name + ".o", d, d);
}

void AddFeedForward(nnet::ParameterSet &p, Initializer &init,
                    const std::string &name, int d, int hidden) {
  AddLinear(p, init, name + ".fc1", hidden, d);
  AddLinear(p, init, name + ".fc2", d, hidden);
}

// Self-attention transformer block with pre-normalization.
void AddBlock(nnet::ParameterSet &p, Initializer &init, const std::string &name,
              int d, int hidden) {
  AddLayerNorm(p, name + ".ln1", d);
  AddAttention(p, init, name + ".attn", d);
  AddLayerNorm(p, name + ".ln2", d);
  AddFeedForward(p, init, name + ".ffn", d, hidden);
}

struct Forward {
  Tape &tape;
  const nnet::ParameterSet &params;

  Var P(const std::string &name) const { return tape.Param(params.Get(name)); }

  Var Linear(const std::string &name, Var x) const {
    return nnet::AddBias(nnet::MatMul(P(name + ".weight"), x), P(name + ".bias"));
  }
  Var Norm(const std::string &name, Var x) const {
    return nnet::LayerNorm(x, P(name + ".gain"), P(name + ".shift"));
  }
  Var Attention(const std::string &name, Var query_in, Var key_in, int heads,
                bool causal) const {
    Var q = Linear(name + ".q", query_in);
    Var k = nnet::MatMul(P(name + ".k.weight"), key_in);
    Var v = Linear(name + ".v", key_in);
    return Linear(name + ".o", nnet::MultiHeadAttention(q, k, v, heads, causal));
  }
  Var FeedForward(const std::string &name, Var x) const {
    return Linear(name + ".fc2", nnet::Gelu(Linear(name + ".fc1", x)));
  }
  Var Block(const std::string &name, Var x, int heads) const {
    Var a = Norm(name + ".ln1", x);
    x = nnet::Add(x, Attention(name + ".attn", a, a, heads, false));
    return nnet::Add(x, FeedForward(name + ".ffn", Norm(name + ".ln2", x)));
  }
};

std::string EncBlock(int i) { return "enc.block" + std::to_string(i); }

}  // namespace

Model InitModel(const ModelConfig &config, std::uint64_t seed) {
  config.Validate();
  Model model;
  model.config = config;
  nnet::ParameterSet &p = model.params;
  Initializer init(seed);
  const int d = config.d_m, hidden = config.ffn_mult * config.d_m;
  const int vocab = config.vocab.size();

  AddLinear(p, init, "enc.in_proj", d, config.feature_dim);
  p.Add("enc.pos", Sinusoid(d, config.max_frames));
  for (int i = 0; i < config.encoder_layers; ++i) {
    AddBlock(p, init, EncBlock(i), d, hidden);
  }
  AddLayerNorm(p, "enc.ln_post", d);

  // FDDT parameters draw from their own stream so the backbone init does not
  // depend on the FDDT configuration.
  if (config.conditioning == Conditioning::kFddt) {
    AddFddtParameters(config.fddt, seed ^ 0x9e3779b97f4a7c15ULL, p);
  }

  p.Add("ctc.conv1.weight", init.Linear(d, 3 * d));
  p.Add("ctc.conv1.bias", Matrix::Zero(d, 1));
  p.Add("ctc.conv2.weight", init.Linear(d, 3 * d));
  p.Add("ctc.conv2.bias", Matrix::Zero(d, 1));
  AddBlock(p, init, "ctc.block", d, hidden);
  AddLayerNorm(p, "ctc.ln_post", d);
  AddLinear(p, init, "ctc.out", vocab, d);

  p.Add("dec.embed", init.Normal(d, vocab, 1.0 / std::sqrt(static_cast<double>(d))));
  p.Add("dec.pos", Sinusoid(d, config.max_decode_len + 2) * 0.1);
  AddLayerNorm(p, "dec.block.ln1", d);
  AddAttention(p, init, "dec.block.self_attn", d);
  AddLayerNorm(p, "dec.block.ln2", d);
  AddAttention(p, init, "dec.block.cross_attn", d);
  AddLayerNorm(p, "dec.block.ln3", d);
  AddFeedForward(p, init, "dec.block.ffn", d, hidden);
  AddLayerNorm(p, "dec.ln_post", d);
  return model;
}

EncoderConditioning MakeConditioning(const ModelConfig &config,
                                     const StnoMask &stno, int num_frames) {
  EncoderConditioning cond;
  if (config.conditioning == Conditioning::kNone) return cond;
  const StnoMask &aligned =
      stno.num_frames() == num_frames ? stno : ResampleMask(stno, num_frames);
  if (config.conditioning == Conditioning::kFddt) {
    cond.mask = ReduceMask(aligned, config.mask_scheme);
  } else {
    cond.input_weights = InputMaskWeights(aligned);
  }
  return cond;
}

Var EncoderForward(Tape &tape, const Model &model, Var features,
                   const EncoderConditioning &cond) {
  const ModelConfig &cfg = model.config;
  Forward f{tape, model.params};
  if (features.rows() != cfg.feature_dim) {
    throw ValidationError("encoder: features have " +
                          std::to_string(features.rows()) + " rows, expected " +
                          std::to_string(cfg.feature_dim));
  }
  const Eigen::Index num_frames = features.cols();
  if (num_frames < 1 || num_frames > cfg.max_frames) {
    throw ValidationError("encoder: " + std::to_string(num_frames) +
                          " frames outside [1, " +
                          std::to_string(cfg.max_frames) + "]");
  }
  Var x = features;
  if (cfg.conditioning == Conditioning::kInputMask) {
    if (!cond.input_weights || cond.input_weights->size() != num_frames) {
      throw ValidationError("encoder: input-mask weights missing or of wrong length");
    }
    x = nnet::ScaleColumns(x, tape.Constant(*cond.input_weights));
  }
  if (cfg.conditioning == Conditioning::kFddt) {
    if (!cond.mask || cond.mask->num_frames() != num_frames) {
      throw ValidationError("encoder: conditioning mask missing or of wrong length");
    }
  }
  Var h = f.Linear("enc.in_proj", x);
  h = nnet::Add(h, nnet::SliceColumns(f.P("enc.pos"), 0, num_frames));
  for (int i = 0; i < cfg.encoder_layers; ++i) {
    if (cfg.conditioning == Conditioning::kFddt && i < cfg.fddt.num_layers) {
      h = ApplyFddt(tape, cfg.fddt, model.params, i, h, *cond.mask);
    }
    h = f.Block(EncBlock(i), h, cfg.heads);
  }
  return f.Norm("enc.ln_post", h);
}

Var CtcHeadForward(Tape &tape, const Model &model, Var enc) {
  if (enc.cols() < 4) {
    throw ValidationError("ctc head: needs at least 4 frames, got " +
                          std::to_string(enc.cols()));
  }
  Forward f{tape, model.params};
  Var c = nnet::Gelu(nnet::Conv1d(enc, f.P("ctc.conv1.weight"),
                                  f.P("ctc.conv1.bias"), 3, 2));
  c = nnet::Gelu(nnet::Conv1d(c, f.P("ctc.conv2.weight"), f.P("ctc.conv2.bias"),
                              3, 2));
  c = f.Block("ctc.block", c, model.config.heads);
  c = f.Norm("ctc.ln_post", c);
  return nnet::LogSoftmax(f.Linear("ctc.out", c));
}

Var DecoderForward(Tape &tape, const Model &model, Var enc,
                   std::span<const int> prefix) {
  if (prefix.empty()) throw ValidationError("decoder: empty prefix");
  if (prefix.front() != Vocabulary::kBos) {
    throw ValidationError("decoder: prefix must start with BOS");
  }
  Forward f{tape, model.params};
  const auto len = static_cast<Eigen::Index>(prefix.size());
  const Matrix &pos_table = model.params.Get("dec.pos").value;
  if (len > pos_table.cols()) {
    throw ValidationError("decoder: prefix longer than positional table");
  }
  const int heads = model.config.heads;
  Var embed = f.P("dec.embed");
  Var y = nnet::Add(nnet::Embedding(embed, prefix),
                    nnet::SliceColumns(f.P("dec.pos"), 0, len));
  Var a = f.Norm("dec.block.ln1", y);
  y = nnet::Add(y, f.Attention("dec.block.self_attn", a, a, heads, true));
  Var c = f.Norm("dec.block.ln2", y);
  y = nnet::Add(y, f.Attention("dec.block.cross_attn", c, enc, heads, false));
  y = nnet::Add(y, f.FeedForward("dec.block.ffn", f.Norm("dec.block.ln3", y)));
  y = f.Norm("dec.ln_post", y);
  return nnet::MatMulTN(embed, y);
}

std::vector<int> GreedyCtcDecode(const Eigen::MatrixXd &log_probs, int blank) {
  std::vector<int> out;
  int previous = -1;
  for (Eigen::Index t = 0; t < log_probs.cols(); ++t) {
    Eigen::Index best = 0;
    log_probs.col(t).maxCoeff(&best);
    const int label = static_cast<int>(best);
    if (label != previous && label != blank) out.push_back(label);
    previous = label;
  }
  return out;
}

std::vector<int> GreedyAttentionDecode(const Model &model,
                                       const Eigen::MatrixXd &enc) {
  std::vector<int> prefix{Vocabulary::kBos};
  std::vector<int> out;
  while (static_cast<int>(out.size()) < model.config.max_decode_len) {
    Tape tape(false);
    Var logits = DecoderForward(tape, model, tape.Constant(enc), prefix);
    Eigen::Index best = 0;
    logits.value().col(logits.cols() - 1).maxCoeff(&best);
    const int token = static_cast<int>(best);
    if (token == Vocabulary::kEos) break;
    out.push_back(token);
    prefix.push_back(token);
  }
  return out;
}

ExampleLosses ComputeExampleLosses(Tape &tape, const Model &model,
                                   const Example &example, double smoothing) {
  const int num_frames = static_cast<int>(example.features.cols());
  EncoderConditioning cond =
      MakeConditioning(model.config, example.stno, num_frames);
  Var enc = EncoderForward(tape, model, tape.Constant(example.features), cond);

  Var log_probs = CtcHeadForward(tape, model, enc);
  Var ctc = nnet::Scale(
      CtcLoss(log_probs, example.targets, Vocabulary::kBlank),
      1.0 / std::max<double>(1.0, static_cast<double>(example.targets.size())));

  std::vector<int> prefix{Vocabulary::kBos};
  prefix.insert(prefix.end(), example.targets.begin(), example.targets.end());
  std::vector<int> shifted(example.targets.begin(), example.targets.end());
  shifted.push_back(Vocabulary::kEos);
  Var logits = DecoderForward(tape, model, enc, prefix);
  Var att = AttentionLoss(logits, shifted, Vocabulary::kPad, smoothing);

  ExampleLosses out;
  out.l_ctc = ctc.scalar();
  out.l_att = att.scalar();
  out.joint = JointLoss(att, ctc, model.config.ctc_weight);
  return out;
}

std::vector<int> Transcribe(const Model &model, const Eigen::MatrixXd &features,
                            const StnoMask &stno, DecodeMode mode) {
  Tape tape(false);
  EncoderConditioning cond = MakeConditioning(
      model.config, stno, static_cast<int>(features.cols()));
  Var enc = EncoderForward(tape, model, tape.Constant(features), cond);
  if (mode == DecodeMode::kCtc) {
    return GreedyCtcDecode(CtcHeadForward(tape, model, enc).value());
  }
  return GreedyAttentionDecode(model, enc.value());
}

}  // namespace tsasr
