// rtnlab/models.hpp

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

// The compared architectures: unimodal LSTMs, early-fusion LSTM, per-segment
// tensor-fusion network (TFN, no recurrence), and the relational tensor
// network (RTN = per-segment tensor fusion + inter-segment LSTM), all with a
// shared trunk splitting into sentiment and emotion heads.

#ifndef RTNLAB_MODELS_HPP_
#define RTNLAB_MODELS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rtnlab/dataio.hpp"
#include "rtnlab/layers.hpp"
#include "rtnlab/ndtensor.hpp"

namespace rtnlab {

enum class Variant { kUniAudio, kUniVideo, kUniText, kEarlyFusion, kTfn, kRtn };

const char* variant_name(Variant v);
Variant parse_variant(const std::string& name);  // config error on unknown

// Fusion order is fixed: audio, then video, then text.
inline constexpr std::array<const char*, 3> kModalityOrder = {"audio", "video",
                                                              "text"};

// Modalities a variant consumes, in fusion order.
std::vector<std::string> required_modalities(Variant v);

struct ModelConfig {
  Variant variant = Variant::kRtn;
  std::map<std::string, std::size_t> modality_input_dims;
  std::map<std::string, std::size_t> modality_embed_dims;
  std::size_t lstm_hidden = 32;
  std::size_t head_hidden = 32;
  std::uint64_t seed = 0;
};

// Per-segment feature size entering the trunk path: the embed size (unimodal),
// the concatenated size (early fusion), or the appended-ones outer-product
// size (tfn/rtn).
std::size_t segment_feature_dim(const ModelConfig& cfg);

struct Prediction {
  double sentiment = 0.0;
  std::array<double, kNumEmotions> emotions{};
};

// Differentiable counterpart used during training.
struct TapedPrediction {
  Tensor sentiment;  // shape {1}
  Tensor emotions;   // shape {6}
};

struct Model {
  ModelConfig config;
  std::map<std::string, DenseParams> encoders;  // one per required modality
  bool has_lstm = false;  // every variant except tfn
  LstmParams lstm;
  DenseParams trunk;      // shared hidden layer, tanh
  DenseParams sent_head;  // linear, 1 output
  DenseParams emo_head;   // linear, 6 outputs

  // Canonical (name, parameter) listing; order is stable across runs and
  // defines the checkpoint layout.
  std::vector<std::pair<std::string, Tensor*>> named_params();
  std::vector<std::pair<std::string, const Tensor*>> named_params() const;
  std::size_t param_count() const;
};

// Deterministic initialization from cfg.seed. Invalid variant/modality
// combinations are configuration errors.
Model build_model(const ModelConfig& cfg);

// Copy of the model whose parameters are differentiable leaves of `tape`.
Model bind_to_tape(const Model& m, Tape& tape);

// One prediction per segment. With tape-bound parameters the outputs stay
// differentiable; with plain parameters this is pure arithmetic. A segment
// missing a required modality is a data error naming the segment index.
std::vector<TapedPrediction> forward_taped(const Model& m,
                                           const VideoSequence& video);

std::vector<Prediction> forward(const Model& m, const VideoSequence& video);

// binary = pos iff y > 0; class7 = clamp(round-half-away-from-zero(y), -3, 3)
// + 3. `pos` is the .first of the returned pair.
std::pair<bool, int> discretize_sentiment(double y);

// Self-describing JSON checkpoint, version "rtnlab-ckpt-1".
inline constexpr const char* kCheckpointVersion = "rtnlab-ckpt-1";
void save_checkpoint(const Model& m, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace rtnlab

#endif  // RTNLAB_MODELS_HPP_
