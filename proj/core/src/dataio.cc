// core/src/dataio.cc

// Copyright 2026 The rtnlab Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rtnlab/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rtnlab/errors.hpp"
#include "rtnlab/rng.hpp"

namespace rtnlab {

const std::array<const char*, kNumEmotions> kEmotionNames = {
    "anger", "disgust", "fear", "happy", "sad", "surprise"};

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::set<std::string> kRecordFields = {
    "video_id", "segment_index", "audio", "video",
    "text",     "sentiment",     "emotions"};

std::vector<double> number_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw DataError(where + ": expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw DataError(where + ": non-numeric entry");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DataError(where + ": non-finite value");
    out.push_back(d);
  }
  return out;
}

SegmentRecord parse_record(const json& j, const std::string& where,
                           bool lenient) {
  if (!j.is_object()) throw DataError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kRecordFields.count(key)) {
      if (lenient) continue;
      throw DataError(where + ": unknown field '" + key + "'");
    }
  }
  for (const std::string& field : kRecordFields)
    if (!j.contains(field))
      throw DataError(where + ": missing field '" + field + "'");

  SegmentRecord rec;
  if (!j["video_id"].is_string())
    throw DataError(where + ": video_id must be a string");
  rec.video_id = j["video_id"].get<std::string>();
  if (rec.video_id.empty()) throw DataError(where + ": empty video_id");
  if (!j["segment_index"].is_number_unsigned() &&
      !(j["segment_index"].is_number_integer() &&
        j["segment_index"].get<long long>() >= 0))
    throw DataError(where + ": segment_index must be a nonnegative integer");
  rec.segment_index = j["segment_index"].get<std::size_t>();
  rec.audio = number_array(j["audio"], where + ": audio");
  rec.video = number_array(j["video"], where + ": video");
  rec.text = number_array(j["text"], where + ": text");
  if (!j["sentiment"].is_number())
    throw DataError(where + ": sentiment must be a number");
  rec.sentiment = j["sentiment"].get<double>();
  if (!std::isfinite(rec.sentiment) || rec.sentiment < -3.0 ||
      rec.sentiment > 3.0)
    throw DataError(where + ": sentiment outside [-3, 3]");
  std::vector<double> emo = number_array(j["emotions"], where + ": emotions");
  if (emo.size() != kNumEmotions)
    throw DataError(where + ": expected " + std::to_string(kNumEmotions) +
                    " emotions, got " + std::to_string(emo.size()));
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    if (emo[e] < 0.0 || emo[e] > 3.0)
      throw DataError(where + ": emotion '" + kEmotionNames[e] +
                      "' outside [0, 3]");
    rec.emotions[e] = emo[e];
  }
  return rec;
}

void check_uniform_dims(const Dataset& videos) {
  bool first = true;
  std::size_t da = 0, dv = 0, dt = 0;
  for (const VideoSequence& video : videos)
    for (const SegmentRecord& rec : video.segments) {
      if (first) {
        da = rec.audio.size();
        dv = rec.video.size();
        dt = rec.text.size();
        first = false;
        continue;
      }
      auto complain = [&](const char* name, std::size_t got, std::size_t want) {
        throw DataError("video '" + rec.video_id + "' segment " +
                        std::to_string(rec.segment_index) + ": " + name +
                        " dim " + std::to_string(got) + " != dataset dim " +
                        std::to_string(want));
      };
      if (rec.audio.size() != da) complain("audio", rec.audio.size(), da);
      if (rec.video.size() != dv) complain("video", rec.video.size(), dv);
      if (rec.text.size() != dt) complain("text", rec.text.size(), dt);
    }
}

void validate_synth_config(const SynthConfig& cfg) {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(cfg.n_train_videos, "n_train_videos");
  positive(cfg.n_val_videos, "n_val_videos");
  positive(cfg.segments_per_video, "segments_per_video");
  positive(cfg.audio_dim, "audio_dim");
  positive(cfg.video_dim, "video_dim");
  positive(cfg.text_dim, "text_dim");
  if (!(cfg.interaction_gain > 0.0))
    throw ConfigError("interaction_gain must be > 0");
  if (cfg.context_gain < 0.0 || cfg.context_gain >= 1.0)
    throw ConfigError("context_gain must be in [0, 1)");
  if (cfg.noise_sigma < 0.0) throw ConfigError("noise_sigma must be >= 0");
}

struct Latent {
  double a, v, x, s;
};

// Pass A of the generator: every random draw that influences the latent
// stream, in a fixed order, so the oracle sees exactly the dataset's stream.
struct SynthStream {
  std::vector<double> dir_audio, dir_video, dir_text;
  std::vector<std::vector<Latent>> videos;
  double lambda_norm = 1.0;
  Rng rng;  // positioned for pass B

  explicit SynthStream(const SynthConfig& cfg) : rng(cfg.seed) {
    auto unit_direction = [&](std::size_t dim) {
      std::vector<double> d(dim);
      double norm = 0.0;
      for (double& v : d) {
        v = rng.gaussian(0.0, 1.0);
        norm += v * v;
      }
      norm = std::sqrt(norm);
      if (norm < 1e-12) {
        d.assign(dim, 0.0);
        d[0] = 1.0;
      } else {
        for (double& v : d) v /= norm;
      }
      return d;
    };
    dir_audio = unit_direction(cfg.audio_dim);
    dir_video = unit_direction(cfg.video_dim);
    dir_text = unit_direction(cfg.text_dim);

    const std::size_t n_total = cfg.n_train_videos + cfg.n_val_videos;
    std::vector<double> magnitudes;
    magnitudes.reserve(n_total * cfg.segments_per_video);
    videos.resize(n_total);
    for (auto& segments : videos) {
      segments.resize(cfg.segments_per_video);
      double s_prev = 0.0;
      for (Latent& seg : segments) {
        seg.a = rng.uniform(-1.0, 1.0);
        seg.v = rng.uniform(-1.0, 1.0);
        seg.x = rng.uniform(-1.0, 1.0);
        seg.s = cfg.interaction_gain * seg.a * seg.v * seg.x +
                cfg.context_gain * s_prev + rng.gaussian(0.0, cfg.noise_sigma);
        s_prev = seg.s;
        magnitudes.push_back(std::abs(seg.s));
      }
    }
    // Nearest-rank 99th percentile of |s| over the whole stream.
    std::sort(magnitudes.begin(), magnitudes.end());
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(magnitudes.size())));
    lambda_norm = std::max(magnitudes[std::min(idx, magnitudes.size()) - 1],
                           1e-12);
  }
};

double clip(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

}  // namespace

Dataset load_dataset(const std::string& path, bool lenient) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);

  std::map<std::string, std::vector<SegmentRecord>> by_video;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw DataError(where + ": invalid JSON");
    SegmentRecord rec = parse_record(j, where, lenient);
    by_video[rec.video_id].push_back(std::move(rec));
  }

  Dataset videos;
  videos.reserve(by_video.size());
  for (auto& [id, segments] : by_video) {
    std::sort(segments.begin(), segments.end(),
              [](const SegmentRecord& a, const SegmentRecord& b) {
                return a.segment_index < b.segment_index;
              });
    for (std::size_t k = 0; k < segments.size(); ++k) {
      if (k > 0 && segments[k].segment_index == segments[k - 1].segment_index)
        throw DataError("video '" + id + "': duplicate segment_index " +
                        std::to_string(segments[k].segment_index));
      if (segments[k].segment_index != k)
        throw DataError("video '" + id + "': segment indices not contiguous " +
                        "from 0 (missing " + std::to_string(k) + ")");
    }
    videos.push_back(VideoSequence{id, std::move(segments)});
  }
  check_uniform_dims(videos);
  return videos;
}

void write_dataset(const Dataset& videos, const std::string& path) {
  std::ostringstream out;
  for (const VideoSequence& video : videos)
    for (const SegmentRecord& rec : video.segments) {
      auto check_finite = [&](const std::vector<double>& vs, const char* name) {
        for (double v : vs)
          if (!std::isfinite(v))
            throw DataError("refusing to write non-finite " +
                            std::string(name) + " value in video '" +
                            rec.video_id + "'");
      };
      check_finite(rec.audio, "audio");
      check_finite(rec.video, "video");
      check_finite(rec.text, "text");
      if (!std::isfinite(rec.sentiment))
        throw DataError("refusing to write non-finite sentiment in video '" +
                        rec.video_id + "'");
      for (double e : rec.emotions)
        if (!std::isfinite(e))
          throw DataError("refusing to write non-finite emotion in video '" +
                          rec.video_id + "'");

      ordered_json j;
      j["video_id"] = rec.video_id;
      j["segment_index"] = rec.segment_index;
      j["audio"] = rec.audio;
      j["video"] = rec.video;
      j["text"] = rec.text;
      j["sentiment"] = rec.sentiment;
      j["emotions"] = rec.emotions;
      out << j.dump() << "\n";
    }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write dataset: " + path);
  file << out.str();
  if (!file) throw DataError("write failed: " + path);
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& videos,
                                            double fraction,
                                            std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ArgumentError("split fraction must be in (0, 1)");
  const std::size_t n = videos.size();
  if (n < 2) throw DataError("split needs at least 2 videos, got " +
                             std::to_string(n));
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  n_val = std::min(std::max<std::size_t>(n_val, 1), n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<bool> in_val(n, false);
  for (std::size_t i = 0; i < n_val; ++i) in_val[order[i]] = true;

  Dataset train, val;
  for (std::size_t i = 0; i < n; ++i)
    (in_val[i] ? val : train).push_back(videos[i]);
  return {std::move(train), std::move(val)};
}

std::pair<Dataset, Dataset> gen_synthetic(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  SynthStream stream(cfg);
  Rng& rng = stream.rng;

  const std::size_t n_total = cfg.n_train_videos + cfg.n_val_videos;
  Dataset all;
  all.reserve(n_total);
  for (std::size_t vi = 0; vi < n_total; ++vi) {
    char id[32];
    std::snprintf(id, sizeof(id), "vid_%05zu", vi);
    VideoSequence video{id, {}};
    video.segments.reserve(cfg.segments_per_video);
    for (std::size_t t = 0; t < cfg.segments_per_video; ++t) {
      const Latent& lat = stream.videos[vi][t];
      SegmentRecord rec;
      rec.video_id = video.video_id;
      rec.segment_index = t;
      const double y = clip(3.0 * lat.s / stream.lambda_norm, -3.0, 3.0);
      rec.sentiment = y;
      rec.emotions[0] = clip(0.4 * std::max(0.0, -y), 0.0, 3.0);  // anger
      rec.emotions[1] = clip(std::abs(rng.gaussian(0.0, 0.1)), 0.0, 3.0);
      rec.emotions[2] = clip(std::abs(rng.gaussian(0.0, 0.1)), 0.0, 3.0);
      rec.emotions[3] = clip(std::max(0.0, y), 0.0, 3.0);  // happy
      rec.emotions[4] = clip(0.6 * std::max(0.0, -y), 0.0, 3.0);  // sad
      rec.emotions[5] = clip(std::abs(rng.gaussian(0.0, 0.1)), 0.0, 3.0);

      auto observe = [&](const std::vector<double>& dir, double latent) {
        std::vector<double> obs(dir.size());
        for (std::size_t i = 0; i < dir.size(); ++i)
          obs[i] = dir[i] * latent + rng.gaussian(0.0, cfg.noise_sigma);
        return obs;
      };
      rec.audio = observe(stream.dir_audio, lat.a);
      rec.video = observe(stream.dir_video, lat.v);
      rec.text = observe(stream.dir_text, lat.x);
      video.segments.push_back(std::move(rec));
    }
    all.push_back(std::move(video));
  }

  Dataset train(all.begin(), all.begin() + cfg.n_train_videos);
  Dataset val(all.begin() + cfg.n_train_videos, all.end());
  return {std::move(train), std::move(val)};
}

OracleReport oracle_accuracy(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  SynthStream stream(cfg);
  OracleReport report;
  std::size_t total = 0, product_hits = 0, contextual_hits = 0;
  for (const auto& segments : stream.videos) {
    double s_hat = 0.0;
    for (const Latent& lat : segments) {
      const double y = clip(3.0 * lat.s / stream.lambda_norm, -3.0, 3.0);
      const bool gold_pos = y > 0.0;
      const double product = lat.a * lat.v * lat.x;
      s_hat = cfg.interaction_gain * product + cfg.context_gain * s_hat;
      product_hits += (product > 0.0) == gold_pos;
      contextual_hits += (s_hat > 0.0) == gold_pos;
      ++total;
    }
  }
  report.product_acc =
      static_cast<double>(product_hits) / static_cast<double>(total);
  report.contextual_acc =
      static_cast<double>(contextual_hits) / static_cast<double>(total);
  return report;
}

}  // namespace rtnlab
