// tsasr/core/src/selfcheck.cc

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

#include "tsasr/selfcheck.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "tsasr/fddt.h"
#include "tsasr/losses.h"
#include "tsasr/metrics.h"
#include "tsasr/model.h"
#include "tsasr/nnet/grad_check.h"
#include "tsasr/nnet/ops.h"
#include "tsasr/stno_mask.h"

namespace tsasr {
namespace {

std::string Sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

std::array<double, 4> EnumerateStno(const Eigen::VectorXd &d, int target) {
  std::array<double, 4> p{};
  const int S = static_cast<int>(d.size());
  for (unsigned pattern = 0; pattern < (1u << S); ++pattern) {
    double w = 1.0;
    bool others = false;
    for (int s = 0; s < S; ++s) {
      const bool on = (pattern >> s) & 1u;
      w *= on ? d(s) : 1.0 - d(s);
      if (on && s != target) others = true;
    }
    const bool self = (pattern >> target) & 1u;
    p[self ? (others ? 3 : 1) : (others ? 2 : 0)] += w;
  }
  return p;
}

double EnumerateCtc(const Eigen::MatrixXd &lp, const std::vector<int> &target) {
  const int V = static_cast<int>(lp.rows()), T = static_cast<int>(lp.cols());
  std::vector<int> path(static_cast<std::size_t>(T), 0);
  double total = 0.0;
  for (;;) {
    std::vector<int> out;
    for (int t = 0; t < T; ++t) {
      if (path[t] != 0 && (t == 0 || path[t] != path[t - 1])) out.push_back(path[t]);
    }
    if (out == target) {
      double s = 0.0;
      for (int t = 0; t < T; ++t) s += lp(path[t], t);
      total += std::exp(s);
    }
    int t = T - 1;
    while (t >= 0 && path[t] == V - 1) path[t--] = 0;
    if (t < 0) break;
    ++path[t];
  }
  return -std::log(total);
}

DiarizationMatrix RandomActivity(std::mt19937_64 &rng, int S, int T) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiarizationMatrix d;
  for (int s = 0; s < S; ++s) d.speaker_ids.push_back("s" + std::to_string(s));
  d.frame_rate = 1.0;
  d.values = Eigen::MatrixXd::NullaryExpr(S, T, [&] {
    const double v = u(rng);
    return u(rng) < 0.2 ? std::round(v) : v;
  });
  return d;
}

CheckResult StnoCheck(std::mt19937_64 &rng) {
  double worst = 0.0;
  for (int draw = 0; draw < 300; ++draw) {
    const int S = 1 + static_cast<int>(rng() % 6), T = 1 + static_cast<int>(rng() % 20);
    DiarizationMatrix d = RandomActivity(rng, S, T);
    const int k = static_cast<int>(rng() % S);
    StnoMask m = ComputeStno(d, k);
    for (int t = 0; t < T; ++t) {
      const auto want = EnumerateStno(d.values.col(t), k);
      for (int c = 0; c < 4; ++c) worst = std::max(worst, std::abs(m.values(c, t) - want[c]));
      worst = std::max(worst, std::abs(m.values.col(t).sum() - 1.0));
    }
  }
  return {"stno_oracle", worst <= 1e-9, "max_abs_error=" + Sci(worst)};
}

CheckResult FddtIdentityCheck(std::mt19937_64 &rng) {
  ModelConfig cfg;
  cfg.d_m = 8;
  cfg.heads = 2;
  cfg.encoder_layers = 2;
  cfg.feature_dim = 4;
  cfg.max_frames = 32;
  cfg.fddt.model_dim = 8;
  cfg.fddt.num_layers = 2;
  cfg.fddt.init = FddtInit::kIdentity;
  Model fddt = InitModel(cfg, rng());
  Model none = fddt;
  none.config.conditioning = Conditioning::kNone;
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int T = 4 + static_cast<int>(rng() % 20);
    Eigen::MatrixXd x = Eigen::MatrixXd::NullaryExpr(4, T, [&] { return n(rng); });
    StnoMask stno = ComputeStno(RandomActivity(rng, 3, T), 0);
    nnet::Tape tape(false);
    Eigen::MatrixXd a =
        EncoderForward(tape, fddt, tape.Constant(x), MakeConditioning(fddt.config, stno, T)).value();
    Eigen::MatrixXd b =
        EncoderForward(tape, none, tape.Constant(x), MakeConditioning(none.config, stno, T)).value();
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return {"fddt_identity", worst <= 1e-6, "max_abs_diff=" + Sci(worst)};
}

CheckResult GradientCheck(std::mt19937_64 &rng) {
  ModelConfig cfg;
  cfg.d_m = 8;
  cfg.heads = 2;
  cfg.encoder_layers = 2;
  cfg.feature_dim = 4;
  cfg.ffn_mult = 2;
  cfg.max_frames = 32;
  cfg.vocab = Vocabulary::Synthetic(5);
  cfg.fddt.model_dim = 8;
  cfg.fddt.num_layers = 2;
  cfg.fddt.init = FddtInit::kRandom;
  Model m = InitModel(cfg, rng());
  std::normal_distribution<double> n(0.0, 1.0);
  Example ex;
  ex.features = Eigen::MatrixXd::NullaryExpr(4, 12, [&] { return n(rng); });
  ex.stno = ComputeStno(RandomActivity(rng, 2, 12), 0);
  ex.targets = {4, 6, 5};
  nnet::GradCheckOptions opts;
  opts.max_coordinates = 250;
  opts.stencil = 4;
  opts.step = 3e-3;
  opts.seed = rng();
  auto report = nnet::CheckGradients(
      m.params, [&](nnet::Tape &tape) { return ComputeExampleLosses(tape, m, ex).joint; },
      opts);
  std::ostringstream detail;
  detail << "coordinates=" << report.coordinates
         << " max_relative_error=" << Sci(report.max_relative_error);
  const auto worst = std::max_element(
      report.params.begin(), report.params.end(),
      [](const auto &a, const auto &b) { return a.max_relative_error < b.max_relative_error; });
  if (worst != report.params.end()) detail << " worst=" << worst->name;
  return {"gradient_check", report.passed && report.coordinates >= 200, detail.str()};
}

CheckResult CtcCheck(std::mt19937_64 &rng) {
  double worst = 0.0;
  int cases = 0;
  std::normal_distribution<double> n(0.0, 1.5);
  while (cases < 200) {
    const int V = 2 + static_cast<int>(rng() % 3), T = 1 + static_cast<int>(rng() % 6);
    std::vector<int> target;
    for (int u = 0, U = static_cast<int>(rng() % 4); u < U; ++u) {
      target.push_back(1 + static_cast<int>(rng() % (V - 1)));
    }
    if (CtcMinFrames(target) > T) continue;
    Eigen::MatrixXd lp = Eigen::MatrixXd::NullaryExpr(V, T, [&] { return n(rng); });
    for (int t = 0; t < T; ++t) lp.col(t).array() -= std::log(lp.col(t).array().exp().sum());
    worst = std::max(worst, std::abs(CtcLossValue(lp, target) - EnumerateCtc(lp, target)));
    ++cases;
  }
  return {"ctc_oracle", worst <= 1e-9, "max_abs_error=" + Sci(worst)};
}

CheckResult OrcCheck(std::mt19937_64 &rng) {
  int mismatches = 0;
  std::uniform_real_distribution<double> when(0.0, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    SegmentList refs, hyp;
    for (int u = 0, U = static_cast<int>(rng() % 7); u < U; ++u) {
      Segment s{"s", "r", when(rng), 0.0, {}};
      s.end = s.start + 1.0;
      for (int k = 0, L = 1 + static_cast<int>(rng() % 4); k < L; ++k) {
        s.words.push_back(std::string(1, static_cast<char>('a' + rng() % 5)));
      }
      refs.entries.push_back(s);
    }
    std::stable_sort(refs.entries.begin(), refs.entries.end(),
                     [](const Segment &a, const Segment &b) { return a.start < b.start; });
    const int K = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < K; ++k) {
      Segment h{"s", "h" + std::to_string(k), when(rng), 0.0, {}};
      h.end = h.start + 2.0;
      for (int w = 0, L = 1 + static_cast<int>(rng() % 6); w < L; ++w) {
        h.words.push_back(std::string(1, static_cast<char>('a' + rng() % 5)));
      }
      hyp.entries.push_back(h);
    }
    const auto streams = HypothesisStreams(hyp);
    const OrcReport dp = OrcWer(refs, streams);
    if (dp.total != BruteForceOrc(refs, streams).total) ++mismatches;
    if (TcOrcWer(refs, hyp, 1e6).total != dp.total) ++mismatches;
  }
  return {"orc_oracle", mismatches == 0, "mismatches=" + std::to_string(mismatches)};
}

}  // namespace

std::vector<CheckResult> RunSelfCheck(std::uint64_t seed, std::ostream *out) {
  std::mt19937_64 rng(seed);
  std::vector<std::function<CheckResult(std::mt19937_64 &)>> checks{
      StnoCheck, FddtIdentityCheck, GradientCheck, CtcCheck, OrcCheck};
  std::vector<CheckResult> results;
  for (const auto &check : checks) {
    results.push_back(check(rng));
    if (out) {
      const CheckResult &r = results.back();
      *out << (r.passed ? "PASS " : "FAIL ") << r.name << " " << r.detail << "\n";
    }
  }
  return results;
}

}  // namespace tsasr
