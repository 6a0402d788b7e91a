// tsasr/core/src/checkpoint.cc

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

#include "tsasr/checkpoint.h"

#include <bit>
#include <cstdint>
#include <set>

#include "tsasr/config.h"
#include "tsasr/error.h"
#include "tsasr/synth_data.h"

namespace tsasr {

namespace {

constexpr std::string_view kMagic = "TSCK";
constexpr std::uint8_t kVersion = 1;

void PutLe(std::string &out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t Le(int width) {
    Need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string_view Bytes(std::size_t n) {
    Need(n);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw ParseError("checkpoint: truncated", pos_);
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string EncodeCheckpoint(const Model &model) {
  std::string out(kMagic);
  out.push_back(static_cast<char>(kVersion));
  const std::string config = ModelConfigToText(model.config);
  PutLe(out, config.size(), 4);
  out += config;
  PutLe(out, model.params.size(), 4);
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const nnet::Parameter &p = model.params[i];
    PutLe(out, p.name.size(), 4);
    out += p.name;
    PutLe(out, static_cast<std::uint64_t>(p.value.rows()), 4);
    PutLe(out, static_cast<std::uint64_t>(p.value.cols()), 4);
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      PutLe(out, std::bit_cast<std::uint64_t>(p.value.data()[k]), 8);
    }
  }
  return out;
}

Model DecodeCheckpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.Bytes(kMagic.size()) != kMagic) throw ParseError("checkpoint: bad magic");
  if (const auto version = r.Le(1); version != kVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto config_len = static_cast<std::size_t>(r.Le(4));
  Model model = InitModel(ModelConfigFromText(r.Bytes(config_len)), 0);
  const auto count = static_cast<std::size_t>(r.Le(4));
  if (count != model.params.size()) {
    throw ParseError("checkpoint: " + std::to_string(count) + " parameters, model has " +
                     std::to_string(model.params.size()));
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name(r.Bytes(static_cast<std::size_t>(r.Le(4))));
    if (!model.params.Contains(name) || !seen.insert(name).second) {
      throw ParseError("checkpoint: unexpected parameter '" + name + "'");
    }
    nnet::Parameter &p = model.params.Get(name);
    const auto rows = static_cast<Eigen::Index>(r.Le(4));
    const auto cols = static_cast<Eigen::Index>(r.Le(4));
    if (rows != p.value.rows() || cols != p.value.cols()) {
      throw ParseError("checkpoint: parameter '" + name + "' has shape " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      p.value.data()[k] = std::bit_cast<double>(r.Le(8));
    }
  }
  if (!r.done()) throw ParseError("checkpoint: trailing bytes");
  return model;
}

void SaveCheckpoint(const std::filesystem::path &path, const Model &model) {
  WriteFile(path, EncodeCheckpoint(model));
}

Model LoadCheckpoint(const std::filesystem::path &path) {
  return DecodeCheckpoint(ReadFile(path));
}

}  // namespace tsasr
