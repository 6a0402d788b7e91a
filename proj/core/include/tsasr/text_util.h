// tsasr/core/include/tsasr/text_util.h

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

#ifndef TSASR_TEXT_UTIL_H_
#define TSASR_TEXT_UTIL_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tsasr {

// Splits on '\n', stripping a trailing '\r'. "a\nb\n" yields {"a", "b", ""}.
std::vector<std::string_view> SplitLines(std::string_view text);

std::vector<std::string_view> SplitWhitespace(std::string_view text);

// Plain delimiter split; empty input yields an empty vector.
std::vector<std::string_view> Split(std::string_view text, char delim);

std::string_view Trim(std::string_view text);

// Whole-string parse; nullopt on trailing garbage or empty input.
std::optional<double> ParseDouble(std::string_view text);
std::optional<long long> ParseInt(std::string_view text);

// Shortest "%.Ng" form that parses back to exactly `value`.
std::string FormatDouble(double value);

std::string JoinWords(const std::vector<std::string> &words);

}  // namespace tsasr

#endif  // TSASR_TEXT_UTIL_H_
