// tsasr/core/include/tsasr/config.h

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

#ifndef TSASR_CONFIG_H_
#define TSASR_CONFIG_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tsasr/model.h"
#include "tsasr/synth_data.h"
#include "tsasr/training.h"

namespace tsasr {

// Plain-text key=value lines. '#' starts a comment; blank lines are skipped.
// Keys are section-prefixed, e.g. "train.base_lr".
class KeyValueConfig {
 public:
  // Throws ParseError naming the 1-based line on a malformed line or a
  // repeated key.
  static KeyValueConfig Parse(std::string_view text);

  // Later values win.
  void Set(const std::string &key, const std::string &value);
  const std::map<std::string, std::string> &entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

 private:
  std::map<std::string, std::string> entries_;
};

struct CorpusSizes {
  int train = 200;
  int dev = 20;
  int test = 20;
};

struct PipelineConfig {
  ModelConfig model;
  SynthConfig synth;
  CorpusSizes corpus;
  ScheduleConfig schedule;
};

// Applies every entry to `config`. Throws ValidationError on an unknown key
// or a value that does not parse; fddt.model_dim follows model.d_m.
void ApplyConfig(const KeyValueConfig &kv, PipelineConfig &config);

// Keys under the given section prefixes ("model.", "fddt.", "synth.",
// "corpus.", "train.", "ctc_preheat.", "fddt_preheat.") as text, in a
// fixed order. Feeding the text back through Parse and ApplyConfig
// reproduces the values exactly.
std::string ConfigToText(const PipelineConfig &config,
                         const std::vector<std::string> &prefixes);

std::string ModelConfigToText(const ModelConfig &model);
ModelConfig ModelConfigFromText(std::string_view text);

}  // namespace tsasr

#endif  // TSASR_CONFIG_H_
