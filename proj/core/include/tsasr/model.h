// tsasr/core/include/tsasr/model.h

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

#ifndef TSASR_MODEL_H_
#define TSASR_MODEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tsasr/fddt.h"
#include "tsasr/nnet/tape.h"
#include "tsasr/stno_mask.h"

namespace tsasr {

// Token inventory. Ids 0..3 are the specials; content tokens follow.
class Vocabulary {
 public:
  static constexpr int kBlank = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kPad = 3;
  static constexpr int kNumSpecial = 4;

  Vocabulary();
  // Content tokens "w00", "w01", ...
  static Vocabulary Synthetic(int num_content_tokens);
  static Vocabulary FromContentTokens(std::vector<std::string> content);

  int size() const { return static_cast<int>(tokens_.size()); }
  int num_content() const { return size() - kNumSpecial; }
  const std::string &Token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  // -1 when unknown.
  int Id(std::string_view token) const;
  const std::vector<std::string> &tokens() const { return tokens_; }

  std::vector<int> Encode(std::span<const std::string> words) const;
  // Drops special tokens.
  std::vector<std::string> Decode(std::span<const int> ids) const;

  bool operator==(const Vocabulary &) const = default;

 private:
  std::vector<std::string> tokens_;
};

enum class Conditioning { kFddt, kInputMask, kNone };

Conditioning ParseConditioning(std::string_view name);  // fddt, input_mask, none
const char *ConditioningName(Conditioning c);

struct ModelConfig {
  int d_m = 64;
  int encoder_layers = 4;
  int heads = 4;
  int feature_dim = 16;
  int ffn_mult = 4;
  int max_frames = 512;       // encoder positional table length
  int max_decode_len = 128;   // greedy rollout limit (tokens after BOS)
  Vocabulary vocab = Vocabulary::Synthetic(24);
  FddtConfig fddt;            // fddt.model_dim is kept equal to d_m
  double ctc_weight = 0.3;
  Conditioning conditioning = Conditioning::kFddt;
  MaskScheme mask_scheme = MaskScheme::kStno;

  void Validate() const;
};

struct Model {
  ModelConfig config;
  nnet::ParameterSet params;
};

// Parameter name prefixes; the trainable subsets of each training stage are
// selected by these.
inline constexpr std::string_view kEncoderPrefix = "enc.";
inline constexpr std::string_view kFddtPrefix = "fddt.";
inline constexpr std::string_view kCtcPrefix = "ctc.";
inline constexpr std::string_view kDecoderPrefix = "dec.";

Model InitModel(const ModelConfig &config, std::uint64_t seed);

// The per-example target-speaker signal handed to the encoder. Exactly one
// of the two members is set for the FDDT and InputMask modes; neither for
// None.
struct EncoderConditioning {
  std::optional<ConditioningMask> mask;
  std::optional<Eigen::RowVectorXd> input_weights;
};

// Builds the conditioning required by `config.conditioning` from a target
// STNO mask, resampled to `num_frames` when lengths differ.
EncoderConditioning MakeConditioning(const ModelConfig &config,
                                     const StnoMask &stno, int num_frames);

// features: feature_dim x T. Returns d_m x T.
//   InputMask: features scaled frame-wise before the input projection.
//   FDDT: ApplyFddt on the input of each of the first fddt.num_layers blocks.
//   None: conditioning ignored.
nnet::Var EncoderForward(nnet::Tape &tape, const Model &model,
                         nnet::Var features, const EncoderConditioning &cond);

// conv(stride 2) -> conv(stride 2) -> self-attention block -> projection ->
// log-softmax. Returns V x ceil(ceil(T / 2) / 2). Requires T >= 4.
nnet::Var CtcHeadForward(nnet::Tape &tape, const Model &model, nnet::Var enc);

// One pre-norm block of causal self-attention, cross-attention to `enc` and
// a feed-forward layer; output logits tied to the token embedding.
// Returns V x len(prefix). prefix[0] must be BOS.
nnet::Var DecoderForward(nnet::Tape &tape, const Model &model, nnet::Var enc,
                         std::span<const int> prefix);

// Argmax per frame, collapse repeats, drop blanks.
std::vector<int> GreedyCtcDecode(const Eigen::MatrixXd &log_probs,
                                 int blank = Vocabulary::kBlank);

// Feeds back the argmax token until EOS or max_decode_len tokens.
std::vector<int> GreedyAttentionDecode(const Model &model,
                                       const Eigen::MatrixXd &enc);

// One training example: a meeting seen from one target speaker.
struct Example {
  Eigen::MatrixXd features;  // feature_dim x T
  StnoMask stno;             // T frames
  std::vector<int> targets;  // content token ids, no specials
};

struct ExampleLosses {
  nnet::Var joint;
  double l_ctc = 0.0;  // per target token
  double l_att = 0.0;
};

// Joint objective for one example. The CTC term is normalized by
// max(1, len(targets)); the attention term averages over non-PAD positions
// of targets + EOS with label smoothing `smoothing`.
ExampleLosses ComputeExampleLosses(nnet::Tape &tape, const Model &model,
                                   const Example &example,
                                   double smoothing = 0.1);

enum class DecodeMode { kCtc, kAttention };
DecodeMode ParseDecodeMode(std::string_view name);
const char *DecodeModeName(DecodeMode mode);

// Inference for one example (no gradients recorded).
std::vector<int> Transcribe(const Model &model, const Eigen::MatrixXd &features,
                            const StnoMask &stno, DecodeMode mode);

}  // namespace tsasr

#endif  // TSASR_MODEL_H_
