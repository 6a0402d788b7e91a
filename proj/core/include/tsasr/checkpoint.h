// tsasr/core/include/tsasr/checkpoint.h

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

#ifndef TSASR_CHECKPOINT_H_
#define TSASR_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "tsasr/model.h"

namespace tsasr {

// Binary checkpoint, all integers little-endian:
//   "TSCK", version byte 1
//   uint32 length + model config text (model.* and fddt.* key=value lines)
//   uint32 parameter count, then per parameter:
//     uint32 length + name, uint32 rows, uint32 cols,
//     rows * cols float64 values in column-major order
// Loading checks the names and shapes against the model the config
// describes, so a round trip is bit-exact.
std::string EncodeCheckpoint(const Model &model);
Model DecodeCheckpoint(std::string_view bytes);

void SaveCheckpoint(const std::filesystem::path &path, const Model &model);
Model LoadCheckpoint(const std::filesystem::path &path);

}  // namespace tsasr

#endif  // TSASR_CHECKPOINT_H_
