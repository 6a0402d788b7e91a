// tsasr/core/include/tsasr/selfcheck.h

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

#ifndef TSASR_SELFCHECK_H_
#define TSASR_SELFCHECK_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace tsasr {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Gradient checks and oracle comparisons on small random problems:
// STNO vs Bernoulli enumeration, FDDT identity no-op, full-model gradient
// check, CTC vs path enumeration, ORC vs exhaustive assignment search.
// One line per check is written to `out` when given.
std::vector<CheckResult> RunSelfCheck(std::uint64_t seed, std::ostream *out = nullptr);

}  // namespace tsasr

#endif  // TSASR_SELFCHECK_H_
