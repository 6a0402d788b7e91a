// tsasr/core/src/synth_data.cc

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

#include "tsasr/synth_data.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "tsasr/error.h"
#include "tsasr/text_util.h"

namespace tsasr {

namespace fs = std::filesystem;

void SynthConfig::Validate() const {
  if (num_speakers < 1 || num_speakers > 4) {
    throw ValidationError("synth: num_speakers must lie in [1, 4]");
  }
  if (vocab_size < 2) throw ValidationError("synth: vocab_size must be >= 2");
  if (frames_per_token < 1) throw ValidationError("synth: frames_per_token must be >= 1");
  if (utterances_per_speaker < 1) {
    throw ValidationError("synth: utterances_per_speaker must be >= 1");
  }
  if (min_tokens_per_utterance < 1 ||
      max_tokens_per_utterance < min_tokens_per_utterance) {
    throw ValidationError("synth: bad tokens-per-utterance range");
  }
  if (!(overlap_ratio >= 0.0 && overlap_ratio <= 1.0)) {
    throw ValidationError("synth: overlap_ratio must lie in [0, 1]");
  }
  if (!(silence_ratio >= 0.0 && silence_ratio < 1.0)) {
    throw ValidationError("synth: silence_ratio must lie in [0, 1)");
  }
  if (!(noise_std >= 0.0)) throw ValidationError("synth: noise_std must be >= 0");
  if (feature_dim < 1) throw ValidationError("synth: feature_dim must be >= 1");
  if (!(frame_rate > 0.0)) throw ValidationError("synth: frame_rate must be > 0");
  if (num_styles < 1) throw ValidationError("synth: num_styles must be >= 1");
  if (!(style_scale >= 0.0)) throw ValidationError("synth: style_scale must be >= 0");
  if (!(pair_scale >= 0.0)) throw ValidationError("synth: pair_scale must be >= 0");
  if (!(gain_scale >= 0.0)) throw ValidationError("synth: gain_scale must be >= 0");
  if (!(style_share_prob >= 0.0 && style_share_prob <= 1.0)) {
    throw ValidationError("synth: style_share_prob must lie in [0, 1]");
  }
}

std::vector<std::string> Meeting::SpeakerWords(const std::string &speaker_id) const {
  std::vector<std::string> words;
  for (const Segment &seg : transcripts.entries) {
    if (seg.speaker_id != speaker_id) continue;
    words.insert(words.end(), seg.words.begin(), seg.words.end());
  }
  return words;
}

namespace {

Eigen::MatrixXd GaussianMatrix(std::mt19937_64 &rng, int rows, int cols,
                               double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

int UniformInt(std::mt19937_64 &rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

struct Utterance {
  int speaker = 0;
  std::vector<int> tokens;
  int start = 0;  // frame
  int length = 0;
};

// Speaker order over all utterances: rounds of shuffled speakers with no
// speaker taking two turns in a row.
std::vector<int> TurnOrder(const SynthConfig &cfg, std::mt19937_64 &rng) {
  std::vector<int> order;
  std::vector<int> round(static_cast<std::size_t>(cfg.num_speakers));
  for (int r = 0; r < cfg.utterances_per_speaker; ++r) {
    std::iota(round.begin(), round.end(), 0);
    std::shuffle(round.begin(), round.end(), rng);
    if (!order.empty() && round.size() > 1 && round.front() == order.back()) {
      std::swap(round[0], round[1]);
    }
    order.insert(order.end(), round.begin(), round.end());
  }
  // Relabel so speakers are numbered by first appearance.
  std::vector<int> label(static_cast<std::size_t>(cfg.num_speakers), -1);
  int next = 0;
  for (int &s : order) {
    if (label[s] < 0) label[s] = next++;
    s = label[s];
  }
  return order;
}

// Overlap frames o_i between utterance i and i+1, spread one frame at a
// time so each utterance keeps at least one frame of its own.
std::optional<std::vector<int>> ScheduleOverlap(const std::vector<Utterance> &utts,
                                                int total) {
  const std::size_t n = utts.size();
  std::vector<int> o(n > 0 ? n - 1 : 0, 0);
  auto slack = [&](std::size_t i) {
    if (utts[i].speaker == utts[i + 1].speaker) return 0;
    const int before = i > 0 ? o[i - 1] : 0;
    const int after = i + 1 < o.size() ? o[i + 1] : 0;
    return std::min(utts[i].length - 1 - before - o[i],
                    utts[i + 1].length - 1 - after - o[i]);
  };
  int remaining = total;
  while (remaining > 0) {
    bool progress = false;
    for (std::size_t i = 0; i < o.size() && remaining > 0; ++i) {
      if (slack(i) > 0) {
        ++o[i];
        --remaining;
        progress = true;
      }
    }
    if (!progress) return std::nullopt;
  }
  return o;
}

}  // namespace

SynthConfig SingleSpeakerConfig(const SynthConfig &config) {
  SynthConfig c = config;
  c.num_speakers = 1;
  c.overlap_ratio = 0.0;
  return c;
}

Meeting GenerateMeeting(const SynthConfig &cfg, const std::string &id) {
  cfg.Validate();
  std::mt19937_64 pool_rng(cfg.embedding_seed);
  const Eigen::MatrixXd embeddings =
      GaussianMatrix(pool_rng, cfg.feature_dim, cfg.vocab_size, 1.0);
  const Eigen::MatrixXd style_pool =
      GaussianMatrix(pool_rng, cfg.feature_dim, cfg.num_styles, cfg.style_scale);
  const Eigen::MatrixXd pair_pool = GaussianMatrix(
      pool_rng, cfg.feature_dim, cfg.vocab_size * cfg.num_styles, cfg.pair_scale);
  const Eigen::MatrixXd gain_pool =
      (cfg.gain_scale * GaussianMatrix(pool_rng, cfg.feature_dim, cfg.num_styles, 1.0))
          .array()
          .exp()
          .matrix();

  std::mt19937_64 rng(cfg.seed);
  const std::vector<int> order = TurnOrder(cfg, rng);

  std::vector<int> styles(static_cast<std::size_t>(cfg.num_styles));
  std::iota(styles.begin(), styles.end(), 0);
  std::shuffle(styles.begin(), styles.end(), rng);
  std::vector<int> speaker_style(static_cast<std::size_t>(cfg.num_speakers));
  for (int s = 0; s < cfg.num_speakers; ++s) {
    speaker_style[s] = styles[static_cast<std::size_t>(s) % styles.size()];
  }
  if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.style_share_prob) {
    std::fill(speaker_style.begin(), speaker_style.end(), speaker_style[0]);
  }

  // Token draws whose lengths cannot host the requested overlap are redrawn.
  constexpr int kMaxAttempts = 100;
  std::vector<Utterance> utts;
  std::vector<int> overlap;
  int total_length = 0, overlap_total = 0;
  for (int attempt = 1;; ++attempt) {
    utts.clear();
    std::vector<int> last_token(static_cast<std::size_t>(cfg.num_speakers), -1);
    for (int s : order) {
      Utterance u;
      u.speaker = s;
      const int len = UniformInt(rng, cfg.min_tokens_per_utterance,
                                 cfg.max_tokens_per_utterance);
      for (int k = 0; k < len; ++k) {
        int tok = UniformInt(rng, 0, cfg.vocab_size - 2);
        if (tok >= last_token[s] && last_token[s] >= 0) ++tok;
        u.tokens.push_back(tok);
        last_token[s] = tok;
      }
      u.length = len * cfg.frames_per_token;
      utts.push_back(std::move(u));
    }
    total_length = 0;
    for (const Utterance &u : utts) total_length += u.length;
    const double r = cfg.overlap_ratio;
    overlap_total = static_cast<int>(std::lround(r * total_length / (1.0 + r)));
    if (auto placed = ScheduleOverlap(utts, overlap_total)) {
      overlap = std::move(*placed);
      break;
    }
    if (attempt == kMaxAttempts) {
      throw ValidationError("synth: infeasible schedule, cannot place " +
                            std::to_string(overlap_total) + " overlap frames in " +
                            std::to_string(kMaxAttempts) + " draws");
    }
  }

  const int speech = total_length - overlap_total;
  const int silence_total = static_cast<int>(
      std::lround(cfg.silence_ratio * speech / (1.0 - cfg.silence_ratio)));
  // Silence goes to the edges and to transitions without overlap.
  std::vector<int> slots{-1, static_cast<int>(overlap.size())};
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    if (overlap[i] == 0) slots.push_back(static_cast<int>(i));
  }
  std::vector<int> slot_frames(slots.size(),
                               silence_total / static_cast<int>(slots.size()));
  for (int k = 0; k < silence_total % static_cast<int>(slots.size()); ++k) {
    ++slot_frames[static_cast<std::size_t>(
        UniformInt(rng, 0, static_cast<int>(slots.size()) - 1))];
  }
  int lead = 0, tail = 0;
  std::vector<int> gap(overlap.size(), 0);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k] == -1) lead = slot_frames[k];
    else if (slots[k] == static_cast<int>(overlap.size())) tail = slot_frames[k];
    else gap[static_cast<std::size_t>(slots[k])] = slot_frames[k];
  }

  int pos = lead;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    utts[i].start = pos;
    if (i < overlap.size()) pos += utts[i].length - overlap[i] + gap[i];
  }
  const int num_frames = utts.back().start + utts.back().length + tail;

  Meeting m;
  m.id = id;
  m.features = Eigen::MatrixXd::Zero(cfg.feature_dim, num_frames);
  m.diarization.frame_rate = cfg.frame_rate;
  m.diarization.values = Eigen::MatrixXd::Zero(cfg.num_speakers, num_frames);
  for (int s = 0; s < cfg.num_speakers; ++s) {
    m.diarization.speaker_ids.push_back("spk" + std::to_string(s));
  }
  for (const Utterance &u : utts) {
    for (std::size_t k = 0; k < u.tokens.size(); ++k) {
      const int first = u.start + static_cast<int>(k) * cfg.frames_per_token;
      for (int f = first; f < first + cfg.frames_per_token; ++f) {
        const int style = speaker_style[u.speaker];
        m.features.col(f) +=
            (embeddings.col(u.tokens[k]) +
             pair_pool.col(u.tokens[k] * cfg.num_styles + style))
                .cwiseProduct(gain_pool.col(style)) +
            style_pool.col(style);
        m.diarization.values(u.speaker, f) = 1.0;
      }
    }
    Segment seg;
    seg.session_id = id;
    seg.speaker_id = m.diarization.speaker_ids[u.speaker];
    seg.start = u.start / cfg.frame_rate;
    seg.end = (u.start + u.length) / cfg.frame_rate;
    for (int tok : u.tokens) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "w%02d", tok);
      seg.words.emplace_back(buf);
    }
    m.transcripts.entries.push_back(std::move(seg));
  }
  if (cfg.noise_std > 0.0) {
    m.features += GaussianMatrix(rng, cfg.feature_dim, num_frames, cfg.noise_std);
  }
  m.features = m.features.cast<float>().cast<double>();
  return m;
}

CorpusSplit ParseSplit(std::string_view name) {
  if (name == "train") return CorpusSplit::kTrain;
  if (name == "dev") return CorpusSplit::kDev;
  if (name == "test") return CorpusSplit::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "'");
}

const char *SplitName(CorpusSplit split) {
  switch (split) {
    case CorpusSplit::kTrain: return "train";
    case CorpusSplit::kDev: return "dev";
    case CorpusSplit::kTest: return "test";
  }
  return "?";
}

std::uint64_t MeetingSeed(std::uint64_t base_seed, CorpusSplit split, int index) {
  return base_seed + 1000000ULL * static_cast<std::uint64_t>(split) +
         static_cast<std::uint64_t>(index);
}

std::vector<Meeting> GenerateCorpus(const SynthConfig &config, int num_meetings,
                                    CorpusSplit split) {
  if (num_meetings < 1) throw ValidationError("synth: need at least one meeting");
  std::vector<Meeting> out;
  out.reserve(static_cast<std::size_t>(num_meetings));
  for (int i = 0; i < num_meetings; ++i) {
    SynthConfig c = config;
    c.seed = MeetingSeed(config.seed, split, i);
    char id[16];
    std::snprintf(id, sizeof(id), "m%04d", i);
    out.push_back(GenerateMeeting(c, id));
  }
  return out;
}

std::string ReadFile(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

namespace {

constexpr char kFeatureMagic[4] = {'T', 'S', 'F', 'T'};
constexpr std::uint8_t kFeatureVersion = 1;

void PutU32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void PutU64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
std::uint64_t GetLe(std::string_view bytes, std::size_t offset, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[offset + i]))
         << (8 * i);
  }
  return v;
}

std::vector<DiarSegment> MeetingRttm(const Meeting &m) {
  std::vector<DiarSegment> segs;
  for (const Segment &s : m.transcripts.entries) {
    segs.push_back({m.id, s.speaker_id, s.start, s.end - s.start});
  }
  return segs;
}

}  // namespace

std::string EncodeFeatures(const Eigen::MatrixXd &features, double frame_rate) {
  std::string out(kFeatureMagic, 4);
  out.push_back(static_cast<char>(kFeatureVersion));
  PutU32(out, static_cast<std::uint32_t>(features.rows()));
  PutU32(out, static_cast<std::uint32_t>(features.cols()));
  PutU64(out, std::bit_cast<std::uint64_t>(frame_rate));
  out.reserve(out.size() + 4 * static_cast<std::size_t>(features.size()));
  for (Eigen::Index t = 0; t < features.cols(); ++t) {
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(features(i, t))));
    }
  }
  return out;
}

Eigen::MatrixXd DecodeFeatures(std::string_view bytes, double *frame_rate) {
  constexpr std::size_t kHeader = 4 + 1 + 4 + 4 + 8;
  if (bytes.size() < kHeader || bytes.substr(0, 4) != std::string_view(kFeatureMagic, 4)) {
    throw ParseError("features: bad magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kFeatureVersion) {
    throw ParseError("features: unsupported version " +
                     std::to_string(static_cast<int>(static_cast<std::uint8_t>(bytes[4]))));
  }
  const auto dim = static_cast<Eigen::Index>(GetLe(bytes, 5, 4));
  const auto frames = static_cast<Eigen::Index>(GetLe(bytes, 9, 4));
  const double rate = std::bit_cast<double>(GetLe(bytes, 13, 8));
  if (bytes.size() != kHeader + 4 * static_cast<std::size_t>(dim * frames)) {
    throw ParseError("features: size does not match header");
  }
  if (frame_rate) *frame_rate = rate;
  Eigen::MatrixXd m(dim, frames);
  std::size_t off = kHeader;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index i = 0; i < dim; ++i, off += 4) {
      m(i, t) = std::bit_cast<float>(static_cast<std::uint32_t>(GetLe(bytes, off, 4)));
    }
  }
  return m;
}

void RenderCorpus(const SynthConfig &config, int num_meetings, CorpusSplit split,
                  const fs::path &dir) {
  const fs::path split_dir = dir / SplitName(split);
  fs::create_directories(split_dir);
  std::string listing;
  for (const Meeting &m : GenerateCorpus(config, num_meetings, split)) {
    const fs::path mdir = split_dir / m.id;
    fs::create_directories(mdir);
    WriteFile(mdir / "features.bin", EncodeFeatures(m.features, m.diarization.frame_rate));
    WriteFile(mdir / "ref.rttm", WriteRttm(MeetingRttm(m)));
    WriteFile(mdir / "ref.seglst.json", WriteSegLst(m.transcripts));
    listing += m.id + "\n";
  }
  WriteFile(split_dir / "meetings.txt", listing);
}

Meeting LoadMeeting(const fs::path &meeting_dir) {
  Meeting m;
  m.id = meeting_dir.filename().string();
  double rate = 0.0;
  m.features = DecodeFeatures(ReadFile(meeting_dir / "features.bin"), &rate);
  const double duration = static_cast<double>(m.features.cols()) / rate;
  m.diarization =
      SegmentsToMatrix(ParseRttm(ReadFile(meeting_dir / "ref.rttm")), rate, duration);
  if (m.diarization.num_frames() != m.features.cols()) {
    throw ValidationError(meeting_dir.string() + ": diarization length " +
                          std::to_string(m.diarization.num_frames()) +
                          " does not match " + std::to_string(m.features.cols()) +
                          " feature frames");
  }
  m.transcripts = ParseSegLst(ReadFile(meeting_dir / "ref.seglst.json"));
  return m;
}

std::vector<Meeting> LoadCorpusSplit(const fs::path &split_dir) {
  std::vector<Meeting> out;
  const std::string listing = ReadFile(split_dir / "meetings.txt");
  for (std::string_view line : SplitLines(listing)) {
    line = Trim(line);
    if (line.empty()) continue;
    out.push_back(LoadMeeting(split_dir / std::string(line)));
  }
  if (out.empty()) throw ValidationError(split_dir.string() + ": no meetings listed");
  return out;
}

}  // namespace tsasr
