// tsasr/tools/tsasr_main.cc

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

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsasr/checkpoint.h"
#include "tsasr/config.h"
#include "tsasr/error.h"
#include "tsasr/selfcheck.h"
#include "tsasr/stno_mask.h"
#include "tsasr/synth_data.h"
#include "tsasr/text_util.h"
#include "tsasr/training.h"

namespace fs = std::filesystem;
using namespace tsasr;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// TSASR_LOG: quiet, info (default) or debug.
enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel CurrentLogLevel() {
  const char *env = std::getenv("TSASR_LOG");
  const std::string v = env ? env : "info";
  if (v == "quiet" || v == "0") return LogLevel::kQuiet;
  if (v == "debug" || v == "2") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

std::ostream *InfoLog() { return CurrentLogLevel() >= LogLevel::kInfo ? &std::cerr : nullptr; }

constexpr const char *kSavedConfig = "config.txt";

// Config file first, then --set overrides, then --seed.
PipelineConfig LoadPipeline(const std::vector<fs::path> &files,
                            const std::vector<std::string> &overrides,
                            std::optional<std::uint64_t> seed, bool seed_synth) {
  KeyValueConfig kv;
  for (const fs::path &f : files) {
    const KeyValueConfig file = KeyValueConfig::Parse(ReadFile(f));
    for (const auto &[k, v] : file.entries()) kv.Set(k, v);
  }
  for (const std::string &o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("--set expects key=value, got '" + o + "'");
    }
    kv.Set(std::string(Trim(o.substr(0, eq))), std::string(Trim(o.substr(eq + 1))));
  }
  PipelineConfig config;
  ApplyConfig(kv, config);
  if (seed) {
    if (seed_synth) config.synth.seed = *seed;
    else config.schedule.seed = *seed;
  }
  return config;
}

std::vector<DiarSegment> SegmentsOfRecording(const std::vector<DiarSegment> &all,
                                             const std::string &recording) {
  std::vector<DiarSegment> out;
  for (const DiarSegment &s : all) {
    if (s.recording_id == recording) out.push_back(s);
  }
  return out;
}

std::vector<Meeting> LoadSplitOrRoot(const fs::path &data, const std::string &split) {
  if (fs::exists(data / "meetings.txt")) return LoadCorpusSplit(data);
  return LoadCorpusSplit(data / split);
}

int RunSynth(const fs::path &config_file, const fs::path &out,
             const std::vector<std::string> &overrides, std::optional<std::uint64_t> seed) {
  std::vector<fs::path> files;
  if (!config_file.empty()) files.push_back(config_file);
  const PipelineConfig config = LoadPipeline(files, overrides, seed, true);
  config.synth.Validate();
  fs::create_directories(out);
  WriteFile(out / kSavedConfig,
            ConfigToText(config, {"synth.", "corpus.", "model.", "fddt.", "train.",
                                  "ctc_preheat.", "fddt_preheat."}));
  const std::pair<CorpusSplit, int> splits[] = {{CorpusSplit::kTrain, config.corpus.train},
                                                {CorpusSplit::kDev, config.corpus.dev},
                                                {CorpusSplit::kTest, config.corpus.test}};
  for (const auto &[split, count] : splits) {
    if (count < 1) continue;
    RenderCorpus(config.synth, count, split, out);
    std::cout << SplitName(split) << " " << count << " meetings -> "
              << (out / SplitName(split)).string() << "\n";
  }
  return 0;
}

int RunMask(const fs::path &rttm, double rate, const std::string &target,
            const std::string &scheme_name, const fs::path &out, bool input_mask,
            const std::string &recording_flag, double duration_flag) {
  if (!(rate > 0.0)) throw ValidationError("--rate must be > 0");
  const std::vector<DiarSegment> all = ParseRttm(ReadFile(rttm));
  if (all.empty()) throw ValidationError(rttm.string() + ": no SPEAKER records");
  std::string recording = recording_flag;
  if (recording.empty()) {
    recording = all.front().recording_id;
    for (const DiarSegment &s : all) {
      if (s.recording_id != recording) {
        throw ValidationError("RTTM holds several recordings; pick one with --recording");
      }
    }
  }
  const std::vector<DiarSegment> segs = SegmentsOfRecording(all, recording);
  if (segs.empty()) throw ValidationError("no segments for recording '" + recording + "'");
  double duration = duration_flag;
  if (duration <= 0.0) {
    for (const DiarSegment &s : segs) duration = std::max(duration, s.end());
  }
  const DiarizationMatrix d = SegmentsToMatrix(segs, rate, duration);
  const int k = d.SpeakerIndex(target);
  if (k < 0) throw ValidationError("speaker '" + target + "' not in the RTTM");
  const StnoMask stno = ComputeStno(d, k);

  DiarizationMatrix result;
  result.frame_rate = rate;
  if (input_mask) {
    result.speaker_ids = {"input_mask"};
    result.values = InputMaskWeights(stno);
  } else {
    const MaskScheme scheme = ParseMaskScheme(scheme_name);
    if (scheme == MaskScheme::kStno) {
      result = StnoToProbMatrix(stno);
    } else {
      const ConditioningMask c = ReduceMask(stno, scheme);
      const char *names = "STNO";
      for (StnoClass cls : c.classes) {
        result.speaker_ids.emplace_back(1, names[static_cast<int>(cls)]);
      }
      result.speaker_ids.emplace_back("I");
      result.values.resize(c.class_weights.rows() + 1, c.num_frames());
      result.values.topRows(c.class_weights.rows()) = c.class_weights;
      result.values.bottomRows(1) = c.identity_weight;
    }
  }
  WriteFile(out, WriteProbMatrix(result));
  std::cout << "mask " << result.speaker_ids.size() << "x" << result.values.cols()
            << " target " << target << " -> " << out.string() << "\n";
  return 0;
}

int RunTrain(const fs::path &config_file, const fs::path &data, const fs::path &out,
             const std::vector<std::string> &overrides, std::optional<std::uint64_t> seed) {
  std::vector<fs::path> files;
  if (fs::exists(data / kSavedConfig)) files.push_back(data / kSavedConfig);
  if (!config_file.empty()) files.push_back(config_file);
  const PipelineConfig config = LoadPipeline(files, overrides, seed, false);
  config.model.Validate();

  TrainingData td;
  td.train = LoadCorpusSplit(data / "train");
  td.dev = LoadCorpusSplit(data / "dev");
  if (config.schedule.ctc_preheat.enabled) {
    td.preheat = GenerateCorpus(SingleSpeakerConfig(config.synth),
                                static_cast<int>(td.train.size()), CorpusSplit::kTrain);
  }
  Model model = InitModel(config.model, config.schedule.seed);
  const TrainReport report = RunSchedule(model, td, config.schedule, out, InfoLog());
  WriteFile(out / kSavedConfig, ConfigToText(config, {"model.", "fddt.", "train.",
                                                      "ctc_preheat.", "fddt_preheat."}));
  std::cout << "best_dev_wer " << FormatDouble(report.best_dev_wer) << " stop "
            << report.stop_reason << " -> " << (out / "ckpt_best").string() << "\n";
  return 0;
}

int RunDecode(const fs::path &ckpt, const fs::path &data, const std::string &split,
              const std::string &target_from, const fs::path &rttm, const fs::path &out,
              const std::string &mode_name, const fs::path &refs_out) {
  const Model model = LoadCheckpoint(ckpt);
  const DecodeMode mode = ParseDecodeMode(mode_name);
  const std::vector<Meeting> meetings = LoadSplitOrRoot(data, split);
  std::vector<DiarSegment> external;
  if (target_from == "rttm") {
    if (rttm.empty()) throw ValidationError("--target-from rttm needs --rttm");
    external = ParseRttm(ReadFile(rttm));
  } else if (target_from != "oracle") {
    throw ValidationError("--target-from must be 'rttm' or 'oracle'");
  }
  SegmentList hyps, refs;
  for (const Meeting &m : meetings) {
    DiarizationMatrix diar = m.diarization;
    if (target_from == "rttm") {
      const double rate = m.diarization.frame_rate;
      const double duration = m.num_frames() / rate;
      std::vector<DiarSegment> segs;
      for (DiarSegment s : SegmentsOfRecording(external, m.id)) {
        if (s.onset >= duration) continue;
        s.duration = std::min(s.duration, duration - s.onset);
        segs.push_back(s);
      }
      if (segs.empty()) {
        if (InfoLog()) *InfoLog() << "decode: no diarization for " << m.id << ", skipped\n";
        continue;
      }
      diar = SegmentsToMatrix(segs, rate, duration);
    }
    const SegmentList h = TranscribeMeeting(model, m.features, diar, m.id, mode);
    hyps.entries.insert(hyps.entries.end(), h.entries.begin(), h.entries.end());
    refs.entries.insert(refs.entries.end(), m.transcripts.entries.begin(),
                        m.transcripts.entries.end());
  }
  WriteFile(out, WriteSegLst(hyps));
  if (!refs_out.empty()) WriteFile(refs_out, WriteSegLst(refs));
  std::cout << "decoded " << meetings.size() << " meetings, " << hyps.entries.size()
            << " segments -> " << out.string() << "\n";
  return 0;
}

int RunScore(const fs::path &refs, const fs::path &hyps, const std::string &metric_name,
             double collar) {
  const OrcMetric metric = ParseOrcMetric(metric_name);
  const CorpusScore score =
      ScoreCorpus(ParseSegLst(ReadFile(refs)), ParseSegLst(ReadFile(hyps)), metric, collar);
  std::cout << FormatScoreReport(score, metric, collar);
  return 0;
}

int RunSelfCheckCommand(std::uint64_t seed) {
  const auto results = RunSelfCheck(seed, &std::cout);
  const bool ok = std::all_of(results.begin(), results.end(),
                              [](const CheckResult &r) { return r.passed; });
  std::cout << (ok ? "selfcheck passed" : "selfcheck FAILED") << "\n";
  return ok ? 0 : kExitData;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Diarization-conditioned target-speaker ASR toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  fs::path config_file, out, data, rttm, ckpt, refs, hyps, refs_out;

  auto *synth = app.add_subcommand("synth", "Render a synthetic train/dev/test corpus");
  synth->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  synth->add_option("--out", out, "Output corpus directory")->required();
  synth->add_option("--set", overrides, "Override a config key (key=value), repeatable");
  synth->add_option("--seed", seed, "Synthesis seed");

  double rate = 0.0, duration = 0.0;
  std::string target, scheme = "stno", recording;
  bool input_mask = false;
  auto *mask = app.add_subcommand("mask", "Compute a target-speaker STNO mask from an RTTM");
  mask->add_option("--rttm", rttm, "Diarization RTTM")->required()->check(CLI::ExistingFile);
  mask->add_option("--rate", rate, "Frame rate in frames per second")->required();
  mask->add_option("--target", target, "Target speaker id")->required();
  mask->add_option("--scheme", scheme, "stno, tno, tn or t")
      ->check(CLI::IsMember({"stno", "tno", "tn", "t"}));
  mask->add_flag("--input-mask", input_mask, "Emit input-masking weights instead");
  mask->add_option("--recording", recording, "Recording id when the RTTM holds several");
  mask->add_option("--duration", duration, "Total duration in seconds (default: last segment end)");
  mask->add_option("--out", out, "Output probability-matrix file")->required();

  auto *train = app.add_subcommand("train", "Run the staged training schedule");
  train->add_option("--config", config_file, "key=value config file")->check(CLI::ExistingFile);
  train->add_option("--data", data, "Corpus directory written by synth")
      ->required()
      ->check(CLI::ExistingDirectory);
  train->add_option("--out", out, "Output directory for checkpoints and report")->required();
  train->add_option("--set", overrides, "Override a config key (key=value), repeatable");
  train->add_option("--seed", seed, "Initialization and shuffling seed");

  std::string split = "test", target_from = "oracle", mode = "ctc";
  auto *decode = app.add_subcommand("decode", "Transcribe every speaker of every meeting");
  decode->add_option("--ckpt", ckpt, "Checkpoint")->required()->check(CLI::ExistingFile);
  decode->add_option("--data", data, "Corpus root or split directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  decode->add_option("--split", split, "Split under a corpus root")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  decode->add_option("--target-from", target_from, "Diarization source: oracle or rttm")
      ->check(CLI::IsMember({"oracle", "rttm"}));
  decode->add_option("--rttm", rttm, "RTTM keyed by meeting id (with --target-from rttm)")
      ->check(CLI::ExistingFile);
  decode->add_option("--mode", mode, "Greedy decoder: ctc or attention")
      ->check(CLI::IsMember({"ctc", "attention"}));
  decode->add_option("--out", out, "Hypothesis SegLST file")->required();
  decode->add_option("--refs-out", refs_out, "Also write the matching references");

  std::string metric = "orc";
  double collar = 0.0;
  auto *score = app.add_subcommand("score", "ORC-WER or time-constrained ORC-WER");
  score->add_option("--refs", refs, "Reference SegLST")->required()->check(CLI::ExistingFile);
  score->add_option("--hyps", hyps, "Hypothesis SegLST")->required()->check(CLI::ExistingFile);
  score->add_option("--metric", metric, "orc or tcorc")->check(CLI::IsMember({"orc", "tcorc"}));
  score->add_option("--collar", collar, "Collar in seconds (tcorc)")->check(CLI::NonNegativeNumber);

  auto *selfcheck = app.add_subcommand("selfcheck", "Gradient checks and oracle comparisons");
  selfcheck->add_option("--seed", seed, "Seed for the random problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) return RunSynth(config_file, out, overrides, seed);
    if (*mask) {
      return RunMask(rttm, rate, target, scheme, out, input_mask, recording, duration);
    }
    if (*train) return RunTrain(config_file, data, out, overrides, seed);
    if (*decode) {
      return RunDecode(ckpt, data, split, target_from, rttm, out, mode, refs_out);
    }
    if (*score) return RunScore(refs, hyps, metric, collar);
    if (*selfcheck) return RunSelfCheckCommand(seed.value_or(1));
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
