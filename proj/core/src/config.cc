// tsasr/core/src/config.cc

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

#include "tsasr/config.h"

#include <functional>

#include "tsasr/error.h"
#include "tsasr/text_util.h"

namespace tsasr {

KeyValueConfig KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig kv;
  std::size_t line_no = 0;
  for (std::string_view line : SplitLines(text)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("config line " + std::to_string(line_no) + ": expected key=value",
                       line_no);
    }
    const std::string key(Trim(line.substr(0, eq)));
    const std::string value(Trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw ParseError("config line " + std::to_string(line_no) + ": empty key", line_no);
    }
    if (kv.entries_.count(key)) {
      throw ParseError("config line " + std::to_string(line_no) + ": repeated key '" +
                           key + "'",
                       line_no);
    }
    kv.entries_[key] = value;
  }
  return kv;
}

void KeyValueConfig::Set(const std::string &key, const std::string &value) {
  entries_[key] = value;
}

namespace {

struct Field {
  std::string key;
  std::function<void(PipelineConfig &, std::string_view)> set;
  std::function<std::string(const PipelineConfig &)> get;
};

[[noreturn]] void BadValue(std::string_view key, std::string_view value) {
  throw ValidationError("config: bad value '" + std::string(value) + "' for " +
                        std::string(key));
}

template <typename Access>
Field IntField(std::string key, Access access) {
  return {key,
          [key, access](PipelineConfig &c, std::string_view v) {
            auto parsed = ParseInt(v);
            if (!parsed) BadValue(key, v);
            access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(*parsed);
          },
          [access](const PipelineConfig &c) {
            return std::to_string(access(const_cast<PipelineConfig &>(c)));
          }};
}

template <typename Access>
Field DoubleField(std::string key, Access access) {
  return {key,
          [key, access](PipelineConfig &c, std::string_view v) {
            auto parsed = ParseDouble(v);
            if (!parsed) BadValue(key, v);
            access(c) = *parsed;
          },
          [access](const PipelineConfig &c) {
            return FormatDouble(access(const_cast<PipelineConfig &>(c)));
          }};
}

template <typename Access>
Field BoolField(std::string key, Access access) {
  return {key,
          [key, access](PipelineConfig &c, std::string_view v) {
            if (v == "true" || v == "1") access(c) = true;
            else if (v == "false" || v == "0") access(c) = false;
            else BadValue(key, v);
          },
          [access](const PipelineConfig &c) {
            return std::string(access(const_cast<PipelineConfig &>(c)) ? "true" : "false");
          }};
}

template <typename Access, typename ParseFn, typename NameFn>
Field EnumField(std::string key, Access access, ParseFn parse, NameFn name) {
  return {key,
          [access, parse](PipelineConfig &c, std::string_view v) { access(c) = parse(v); },
          [access, name](const PipelineConfig &c) {
            return std::string(name(access(const_cast<PipelineConfig &>(c))));
          }};
}

void AddStageFields(std::vector<Field> &f, const std::string &prefix,
                    StagePlan ScheduleConfig::*plan) {
  auto p = [plan](PipelineConfig &c) -> StagePlan & { return c.schedule.*plan; };
  f.push_back(BoolField(prefix + "enabled", [p](PipelineConfig &c) -> bool & { return p(c).enabled; }));
  f.push_back(IntField(prefix + "max_epochs", [p](PipelineConfig &c) -> int & { return p(c).max_epochs; }));
  f.push_back(IntField(prefix + "warmup_steps", [p](PipelineConfig &c) -> int & { return p(c).warmup_steps; }));
  f.push_back(IntField(prefix + "max_steps", [p](PipelineConfig &c) -> int & { return p(c).max_steps; }));
  f.push_back(IntField(prefix + "patience", [p](PipelineConfig &c) -> int & { return p(c).patience; }));
}

std::string JoinComma(const std::vector<std::string> &items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

const std::vector<Field> &Fields() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
#define TSASR_REF(type, expr) [](PipelineConfig &c) -> type & { return c.expr; }
    f.push_back(IntField("model.d_m", TSASR_REF(int, model.d_m)));
    f.push_back(IntField("model.encoder_layers", TSASR_REF(int, model.encoder_layers)));
    f.push_back(IntField("model.heads", TSASR_REF(int, model.heads)));
    f.push_back(IntField("model.feature_dim", TSASR_REF(int, model.feature_dim)));
    f.push_back(IntField("model.ffn_mult", TSASR_REF(int, model.ffn_mult)));
    f.push_back(IntField("model.max_frames", TSASR_REF(int, model.max_frames)));
    f.push_back(IntField("model.max_decode_len", TSASR_REF(int, model.max_decode_len)));
    f.push_back({"model.vocab_size",
                 [](PipelineConfig &c, std::string_view v) {
                   auto n = ParseInt(v);
                   if (!n || *n < 1) BadValue("model.vocab_size", v);
                   c.model.vocab = Vocabulary::Synthetic(static_cast<int>(*n));
                 },
                 nullptr});
    f.push_back({"model.vocab",
                 [](PipelineConfig &c, std::string_view v) {
                   std::vector<std::string> tokens;
                   for (std::string_view t : Split(v, ',')) {
                     t = Trim(t);
                     if (t.empty()) BadValue("model.vocab", v);
                     tokens.emplace_back(t);
                   }
                   c.model.vocab = Vocabulary::FromContentTokens(std::move(tokens));
                 },
                 [](const PipelineConfig &c) {
                   const auto &all = c.model.vocab.tokens();
                   return JoinComma(std::vector<std::string>(
                       all.begin() + Vocabulary::kNumSpecial, all.end()));
                 }});
    f.push_back(DoubleField("model.ctc_weight", TSASR_REF(double, model.ctc_weight)));
    f.push_back(EnumField("model.conditioning", TSASR_REF(Conditioning, model.conditioning),
                          ParseConditioning, ConditioningName));
    f.push_back(EnumField("model.mask_scheme", TSASR_REF(MaskScheme, model.mask_scheme),
                          ParseMaskScheme, MaskSchemeName));
    f.push_back(IntField("fddt.num_layers", TSASR_REF(int, model.fddt.num_layers)));
    f.push_back(EnumField("fddt.parameterization",
                          TSASR_REF(FddtParameterization, model.fddt.parameterization),
                          ParseFddtParameterization, FddtParameterizationName));
    f.push_back(EnumField("fddt.init", TSASR_REF(FddtInit, model.fddt.init), ParseFddtInit,
                          FddtInitName));
    f.push_back(DoubleField("fddt.suppress_value", TSASR_REF(double, model.fddt.suppress_value)));

    f.push_back(IntField("synth.num_speakers", TSASR_REF(int, synth.num_speakers)));
    f.push_back(IntField("synth.vocab_size", TSASR_REF(int, synth.vocab_size)));
    f.push_back(IntField("synth.frames_per_token", TSASR_REF(int, synth.frames_per_token)));
    f.push_back(IntField("synth.utterances_per_speaker", TSASR_REF(int, synth.utterances_per_speaker)));
    f.push_back(IntField("synth.min_tokens_per_utterance", TSASR_REF(int, synth.min_tokens_per_utterance)));
    f.push_back(IntField("synth.max_tokens_per_utterance", TSASR_REF(int, synth.max_tokens_per_utterance)));
    f.push_back(DoubleField("synth.overlap_ratio", TSASR_REF(double, synth.overlap_ratio)));
    f.push_back(DoubleField("synth.silence_ratio", TSASR_REF(double, synth.silence_ratio)));
    f.push_back(DoubleField("synth.noise_std", TSASR_REF(double, synth.noise_std)));
    f.push_back(IntField("synth.feature_dim", TSASR_REF(int, synth.feature_dim)));
    f.push_back(DoubleField("synth.frame_rate", TSASR_REF(double, synth.frame_rate)));
    f.push_back(IntField("synth.num_styles", TSASR_REF(int, synth.num_styles)));
    f.push_back(DoubleField("synth.style_scale", TSASR_REF(double, synth.style_scale)));
    f.push_back(DoubleField("synth.pair_scale", TSASR_REF(double, synth.pair_scale)));
    f.push_back(DoubleField("synth.gain_scale", TSASR_REF(double, synth.gain_scale)));
    f.push_back(DoubleField("synth.style_share_prob", TSASR_REF(double, synth.style_share_prob)));
    f.push_back(IntField("synth.embedding_seed", TSASR_REF(std::uint64_t, synth.embedding_seed)));
    f.push_back(IntField("synth.seed", TSASR_REF(std::uint64_t, synth.seed)));
    f.push_back(IntField("corpus.train", TSASR_REF(int, corpus.train)));
    f.push_back(IntField("corpus.dev", TSASR_REF(int, corpus.dev)));
    f.push_back(IntField("corpus.test", TSASR_REF(int, corpus.test)));

    f.push_back(DoubleField("train.base_lr", TSASR_REF(double, schedule.base_lr)));
    f.push_back(DoubleField("train.fddt_lr", TSASR_REF(double, schedule.fddt_lr)));
    f.push_back(DoubleField("train.weight_decay", TSASR_REF(double, schedule.weight_decay)));
    f.push_back(IntField("train.batch_size", TSASR_REF(int, schedule.batch_size)));
    f.push_back(IntField("train.seed", TSASR_REF(std::uint64_t, schedule.seed)));
    f.push_back(DoubleField("train.label_smoothing", TSASR_REF(double, schedule.label_smoothing)));
    f.push_back(EnumField("train.dev_decode", TSASR_REF(DecodeMode, schedule.dev_decode),
                          ParseDecodeMode, DecodeModeName));
#undef TSASR_REF
    AddStageFields(f, "train.", &ScheduleConfig::full);
    AddStageFields(f, "ctc_preheat.", &ScheduleConfig::ctc_preheat);
    AddStageFields(f, "fddt_preheat.", &ScheduleConfig::fddt_preheat);
    return f;
  }();
  return fields;
}

}  // namespace

void ApplyConfig(const KeyValueConfig &kv, PipelineConfig &config) {
  // model.vocab_size and model.vocab must not fight; the explicit list wins.
  std::vector<std::pair<std::string, std::string>> ordered(kv.entries().begin(),
                                                           kv.entries().end());
  std::stable_partition(ordered.begin(), ordered.end(),
                        [](const auto &e) { return e.first == "model.vocab_size"; });
  for (const auto &[key, value] : ordered) {
    bool found = false;
    for (const Field &f : Fields()) {
      if (f.key == key) {
        f.set(config, value);
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("config: unknown key '" + key + "'");
  }
  config.model.fddt.model_dim = config.model.d_m;
}

std::string ConfigToText(const PipelineConfig &config,
                         const std::vector<std::string> &prefixes) {
  std::string out;
  for (const Field &f : Fields()) {
    if (!f.get) continue;
    for (const std::string &p : prefixes) {
      if (f.key.starts_with(p)) {
        out += f.key + "=" + f.get(config) + "\n";
        break;
      }
    }
  }
  return out;
}

std::string ModelConfigToText(const ModelConfig &model) {
  PipelineConfig c;
  c.model = model;
  return ConfigToText(c, {"model.", "fddt."});
}

ModelConfig ModelConfigFromText(std::string_view text) {
  const KeyValueConfig kv = KeyValueConfig::Parse(text);
  for (const auto &[key, value] : kv.entries()) {
    if (!key.starts_with("model.") && !key.starts_with("fddt.")) {
      throw ValidationError("model config: unexpected key '" + key + "'");
    }
  }
  PipelineConfig c;
  ApplyConfig(kv, c);
  c.model.Validate();
  return c.model;
}

}  // namespace tsasr
