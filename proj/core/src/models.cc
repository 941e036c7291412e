// core/src/models.cc

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

#include "rtnlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "rtnlab/errors.hpp"
#include "rtnlab/fusion.hpp"
#include "rtnlab/rng.hpp"

namespace rtnlab {

namespace {

using json = nlohmann::json;

const std::vector<double>& modality_values(const SegmentRecord& rec,
                                           const std::string& modality) {
  if (modality == "audio") return rec.audio;
  if (modality == "video") return rec.video;
  return rec.text;
}

void validate_config(const ModelConfig& cfg) {
  for (const std::string& m : required_modalities(cfg.variant)) {
    auto in = cfg.modality_input_dims.find(m);
    if (in == cfg.modality_input_dims.end() || in->second == 0)
      throw ConfigError(std::string(variant_name(cfg.variant)) +
                        " requires modality_input_dims." + m + " >= 1");
    auto emb = cfg.modality_embed_dims.find(m);
    if (emb == cfg.modality_embed_dims.end() || emb->second == 0)
      throw ConfigError(std::string(variant_name(cfg.variant)) +
                        " requires modality_embed_dims." + m + " >= 1");
  }
  if (cfg.head_hidden == 0) throw ConfigError("head_hidden must be >= 1");
  if (cfg.variant != Variant::kTfn && cfg.lstm_hidden == 0)
    throw ConfigError("lstm_hidden must be >= 1");
}

}  // namespace

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kUniAudio: return "uni_audio";
    case Variant::kUniVideo: return "uni_video";
    case Variant::kUniText: return "uni_text";
    case Variant::kEarlyFusion: return "early_fusion";
    case Variant::kTfn: return "tfn";
    case Variant::kRtn: return "rtn";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::kUniAudio, Variant::kUniVideo, Variant::kUniText,
                    Variant::kEarlyFusion, Variant::kTfn, Variant::kRtn})
    if (name == variant_name(v)) return v;
  throw ConfigError("unknown model variant '" + name +
                    "' (expected uni_audio, uni_video, uni_text, "
                    "early_fusion, tfn, or rtn)");
}

std::vector<std::string> required_modalities(Variant v) {
  switch (v) {
    case Variant::kUniAudio: return {"audio"};
    case Variant::kUniVideo: return {"video"};
    case Variant::kUniText: return {"text"};
    default: return {"audio", "video", "text"};
  }
}

std::size_t segment_feature_dim(const ModelConfig& cfg) {
  std::vector<std::size_t> embed_dims;
  for (const std::string& m : required_modalities(cfg.variant))
    embed_dims.push_back(cfg.modality_embed_dims.at(m));
  switch (cfg.variant) {
    case Variant::kTfn:
    case Variant::kRtn:
      return fused_dim(embed_dims, FusionMode::kTensor);
    case Variant::kEarlyFusion:
      return fused_dim(embed_dims, FusionMode::kEarly);
    default:
      return embed_dims[0];
  }
}

std::vector<std::pair<std::string, Tensor*>> Model::named_params() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (const char* m : kModalityOrder) {
    auto it = encoders.find(m);
    if (it == encoders.end()) continue;
    out.emplace_back("encoder." + std::string(m) + ".weight",
                     &it->second.weight);
    out.emplace_back("encoder." + std::string(m) + ".bias", &it->second.bias);
  }
  if (has_lstm) {
    out.emplace_back("lstm.w_i", &lstm.w_i);
    out.emplace_back("lstm.w_f", &lstm.w_f);
    out.emplace_back("lstm.w_o", &lstm.w_o);
    out.emplace_back("lstm.w_g", &lstm.w_g);
    out.emplace_back("lstm.u_i", &lstm.u_i);
    out.emplace_back("lstm.u_f", &lstm.u_f);
    out.emplace_back("lstm.u_o", &lstm.u_o);
    out.emplace_back("lstm.u_g", &lstm.u_g);
    out.emplace_back("lstm.b_i", &lstm.b_i);
    out.emplace_back("lstm.b_f", &lstm.b_f);
    out.emplace_back("lstm.b_o", &lstm.b_o);
    out.emplace_back("lstm.b_g", &lstm.b_g);
  }
  out.emplace_back("trunk.weight", &trunk.weight);
  out.emplace_back("trunk.bias", &trunk.bias);
  out.emplace_back("sent.weight", &sent_head.weight);
  out.emplace_back("sent.bias", &sent_head.bias);
  out.emplace_back("emo.weight", &emo_head.weight);
  out.emplace_back("emo.bias", &emo_head.bias);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> Model::named_params() const {
  auto mut = const_cast<Model*>(this)->named_params();
  return {mut.begin(), mut.end()};
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named_params()) n += t->size();
  return n;
}

Model build_model(const ModelConfig& cfg) {
  validate_config(cfg);
  Model m;
  m.config = cfg;
  Rng rng(cfg.seed);
  for (const std::string& mod : required_modalities(cfg.variant))
    m.encoders.emplace(mod, make_dense(cfg.modality_input_dims.at(mod),
                                       cfg.modality_embed_dims.at(mod), rng));
  const std::size_t feature_dim = segment_feature_dim(cfg);
  m.has_lstm = cfg.variant != Variant::kTfn;
  std::size_t trunk_in = feature_dim;
  if (m.has_lstm) {
    m.lstm = make_lstm(feature_dim, cfg.lstm_hidden, rng);
    trunk_in = cfg.lstm_hidden;
  }
  m.trunk = make_dense(trunk_in, cfg.head_hidden, rng);
  m.sent_head = make_dense(cfg.head_hidden, 1, rng);
  m.emo_head = make_dense(cfg.head_hidden, kNumEmotions, rng);
  return m;
}

Model bind_to_tape(const Model& m, Tape& tape) {
  Model bound = m;
  for (auto& [name, t] : bound.named_params()) *t = tape.leaf(*t);
  return bound;
}

std::vector<TapedPrediction> forward_taped(const Model& m,
                                           const VideoSequence& video) {
  const std::vector<std::string> modalities =
      required_modalities(m.config.variant);

  // Per-segment features.
  std::vector<Tensor> features;
  features.reserve(video.segments.size());
  for (const SegmentRecord& rec : video.segments) {
    std::vector<Tensor> embeds;
    for (const std::string& mod : modalities) {
      const std::vector<double>& raw = modality_values(rec, mod);
      const std::size_t want = m.config.modality_input_dims.at(mod);
      if (raw.size() != want)
        throw DataError("video '" + video.video_id + "' segment " +
                        std::to_string(rec.segment_index) + ": modality '" +
                        mod + "' has dim " + std::to_string(raw.size()) +
                        ", model expects " + std::to_string(want));
      embeds.push_back(
          dense_forward(Tensor::vec(raw), m.encoders.at(mod),
                        Activation::kTanh));
    }
    switch (m.config.variant) {
      case Variant::kTfn:
      case Variant::kRtn:
        features.push_back(tensor_fuse(embeds).values);
        break;
      case Variant::kEarlyFusion:
        features.push_back(concat(embeds));
        break;
      default:
        features.push_back(embeds[0]);
    }
  }

  std::vector<Tensor> trunk_inputs =
      m.has_lstm
          ? lstm_sequence(features, m.lstm, zero_state(m.config.lstm_hidden))
          : std::move(features);

  std::vector<TapedPrediction> preds;
  preds.reserve(trunk_inputs.size());
  for (const Tensor& t : trunk_inputs) {
    const Tensor hidden = dense_forward(t, m.trunk, Activation::kTanh);
    preds.push_back(TapedPrediction{
        dense_forward(hidden, m.sent_head, Activation::kIdentity),
        dense_forward(hidden, m.emo_head, Activation::kIdentity)});
  }
  return preds;
}

std::vector<Prediction> forward(const Model& m, const VideoSequence& video) {
  std::vector<TapedPrediction> taped = forward_taped(m, video);
  std::vector<Prediction> out;
  out.reserve(taped.size());
  for (const TapedPrediction& p : taped) {
    Prediction plain;
    plain.sentiment = p.sentiment.item();
    for (std::size_t e = 0; e < kNumEmotions; ++e)
      plain.emotions[e] = p.emotions[e];
    out.push_back(plain);
  }
  return out;
}

std::pair<bool, int> discretize_sentiment(double y) {
  if (!std::isfinite(y))
    throw ArgumentError("discretize_sentiment: non-finite value");
  const double rounded = std::round(y);  // half away from zero
  const int class7 =
      static_cast<int>(std::min(3.0, std::max(-3.0, rounded))) + 3;
  return {y > 0.0, class7};
}

void save_checkpoint(const Model& m, const std::string& path) {
  json j;
  j["version"] = kCheckpointVersion;
  json cfg;
  cfg["variant"] = variant_name(m.config.variant);
  cfg["modality_input_dims"] = m.config.modality_input_dims;
  cfg["modality_embed_dims"] = m.config.modality_embed_dims;
  cfg["lstm_hidden"] = m.config.lstm_hidden;
  cfg["head_hidden"] = m.config.head_hidden;
  cfg["seed"] = m.config.seed;
  j["config"] = cfg;
  json params = json::array();
  for (const auto& [name, t] : m.named_params()) {
    json p;
    p["name"] = name;
    p["shape"] = t->shape();
    p["values"] = t->values();
    params.push_back(p);
  }
  j["params"] = params;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw CheckpointError(path + ": not a valid checkpoint document");
  if (j.value("version", "") != std::string(kCheckpointVersion))
    throw CheckpointError(path + ": unsupported checkpoint version '" +
                          j.value("version", "<missing>") + "'");
  ModelConfig cfg;
  try {
    const json& jc = j.at("config");
    cfg.variant = parse_variant(jc.at("variant").get<std::string>());
    cfg.modality_input_dims =
        jc.at("modality_input_dims").get<std::map<std::string, std::size_t>>();
    cfg.modality_embed_dims =
        jc.at("modality_embed_dims").get<std::map<std::string, std::size_t>>();
    cfg.lstm_hidden = jc.at("lstm_hidden").get<std::size_t>();
    cfg.head_hidden = jc.at("head_hidden").get<std::size_t>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();
  } catch (const ConfigError& e) {
    throw CheckpointError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw CheckpointError(path + ": malformed config: " + e.what());
  }

  Model m;
  try {
    m = build_model(cfg);
  } catch (const ConfigError& e) {
    throw CheckpointError(path + ": " + e.what());
  }
  std::map<std::string, Tensor*> by_name;
  for (auto& [name, t] : m.named_params()) by_name[name] = t;

  if (!j.contains("params") || !j["params"].is_array())
    throw CheckpointError(path + ": missing params array");
  std::size_t seen = 0;
  for (const json& p : j["params"]) {
    std::string name;
    Shape shape;
    std::vector<double> values;
    try {
      name = p.at("name").get<std::string>();
      shape = p.at("shape").get<Shape>();
      values = p.at("values").get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw CheckpointError(path + ": malformed param entry: " + e.what());
    }
    auto it = by_name.find(name);
    if (it == by_name.end())
      throw CheckpointError(path + ": unexpected parameter '" + name + "'");
    if (shape != it->second->shape())
      throw CheckpointError(path + ": parameter '" + name + "' has shape " +
                            shape_str(shape) + ", model expects " +
                            shape_str(it->second->shape()));
    if (values.size() != it->second->size())
      throw CheckpointError(path + ": parameter '" + name +
                            "' value count mismatch");
    for (double v : values)
      if (!std::isfinite(v))
        throw CheckpointError(path + ": parameter '" + name +
                              "' has non-finite values");
    *it->second = Tensor(shape, std::move(values));
    ++seen;
  }
  if (seen != by_name.size())
    throw CheckpointError(path + ": checkpoint has " + std::to_string(seen) +
                          " parameters, model expects " +
                          std::to_string(by_name.size()));
  return m;
}

}  // namespace rtnlab
