// tsasr/core/include/tsasr/error.h

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

#ifndef TSASR_ERROR_H_
#define TSASR_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tsasr {

// Malformed input text (RTTM, SegLST, probability matrices, configs).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string &what, std::size_t location)
      : std::runtime_error(what), location_(location) {}
  explicit ParseError(const std::string &what)
      : std::runtime_error(what), location_(0) {}

  // 1-based line number or 0-based record index, depending on the format;
  // 0 when not applicable.
  std::size_t location() const { return location_; }

 private:
  std::size_t location_;
};

// A well-formed value that violates a domain invariant or precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced inside a numeric op, or a non-finite gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tsasr

#endif  // TSASR_ERROR_H_
