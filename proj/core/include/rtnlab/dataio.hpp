// rtnlab/dataio.hpp

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

// Dataset model, JSON Lines file format, deterministic video-level splits,
// and the planted synthetic multimodal generator used for verification.

#ifndef RTNLAB_DATAIO_HPP_
#define RTNLAB_DATAIO_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rtnlab {

inline constexpr std::size_t kNumEmotions = 6;

// Emotion order is fixed everywhere: anger, disgust, fear, happy, sad,
// surprise.
extern const std::array<const char*, kNumEmotions> kEmotionNames;

struct SegmentRecord {
  std::string video_id;
  std::size_t segment_index = 0;
  std::vector<double> audio;
  std::vector<double> video;
  std::vector<double> text;
  double sentiment = 0.0;  // [-3, 3]
  std::array<double, kNumEmotions> emotions{};  // each in [0, 3]
};

// Ordered segments of one video; segment_index runs 0..L-1 contiguously.
struct VideoSequence {
  std::string video_id;
  std::vector<SegmentRecord> segments;
};

using Dataset = std::vector<VideoSequence>;

// Planted-signal generator configuration. Per segment, latent scalars
// a, v, x ~ Uniform(-1, 1) drive a raw sentiment
//   s_t = interaction_gain * a*v*x + context_gain * s_{t-1} + Normal(0, noise)
// which is rescaled by the stream's 99th-percentile |s| and clipped to
// [-3, 3]. Observed modality vectors are a fixed random unit direction per
// modality times the latent scalar, plus per-coordinate noise.
struct SynthConfig {
  std::size_t n_train_videos = 200;
  std::size_t n_val_videos = 50;
  std::size_t segments_per_video = 10;
  std::size_t audio_dim = 24;
  std::size_t video_dim = 24;
  std::size_t text_dim = 24;
  double interaction_gain = 8.0;  // lambda
  double context_gain = 0.5;      // mu, in [0, 1)
  double noise_sigma = 0.1;
  std::uint64_t seed = 42;
};

// Groups records by video_id (videos sorted by id) and orders segments by
// index. Duplicate or gapped indices, unknown fields (without `lenient`),
// missing fields, out-of-range labels, and ragged feature dims are data
// errors naming the offending line or video.
Dataset load_dataset(const std::string& path, bool lenient = false);

// One record per line; refuses non-finite values. load(write(x)) == x.
void write_dataset(const Dataset& videos, const std::string& path);

// Video-granularity split: |val| = round(fraction * n) clamped to
// [1, n - 1]; membership is a seeded shuffle, order within each part keeps
// the input order.
std::pair<Dataset, Dataset> split_train_val(const Dataset& videos,
                                            double fraction,
                                            std::uint64_t seed);

// Deterministic planted dataset: (train, val).
std::pair<Dataset, Dataset> gen_synthetic(const SynthConfig& cfg);

// Noise-free reference accuracies on the generator's own stream, for
// calibrating ordering-experiment margins:
//  - product_acc thresholds the per-segment product a*v*x alone;
//  - contextual_acc thresholds the noise-free recursion
//    s'_t = interaction_gain * a*v*x + context_gain * s'_{t-1},
//    i.e. the best a context-aware model can do without seeing the noise.
struct OracleReport {
  double product_acc = 0.0;
  double contextual_acc = 0.0;
};
OracleReport oracle_accuracy(const SynthConfig& cfg);

}  // namespace rtnlab

#endif  // RTNLAB_DATAIO_HPP_
