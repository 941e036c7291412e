// tools/rtnlab.cc

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

// Single command-line entry point: dataset generation, training, evaluation,
// model comparison, audio/text feature extraction, and gradient verification.
//
// Exit codes: 0 success, 1 verification failure, 2 config error, 3 data
// error, 4 checkpoint error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rtnlab/audiofeat.hpp"
#include "rtnlab/dataio.hpp"
#include "rtnlab/errors.hpp"
#include "rtnlab/evalmetrics.hpp"
#include "rtnlab/models.hpp"
#include "rtnlab/textfeat.hpp"
#include "rtnlab/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using namespace rtnlab;

namespace {

// --- configuration document --------------------------------------------------

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  bool lenient = false;
};

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

json parse_set_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);  // plain string
  return v;
}

// Applies `--set a.b.c=value` overrides onto the config document.
void apply_overrides(json& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    const std::string path = kv.substr(0, eq);
    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (key.empty())
        throw ConfigError("--set has an empty path component in '" + path + "'");
      if (dot == std::string::npos) {
        (*node)[key] = parse_set_value(kv.substr(eq + 1));
        break;
      }
      if (!node->contains(key)) (*node)[key] = json::object();
      node = &(*node)[key];
      if (!node->is_object())
        throw ConfigError("--set path '" + path +
                          "' descends into a non-object value");
      start = dot + 1;
    }
  }
}

json load_config(const GlobalArgs& g) {
  json cfg = json::object();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw ConfigError("cannot open config file: " + g.config_path);
    cfg = json::parse(in, nullptr, false);
    if (cfg.is_discarded() || !cfg.is_object())
      throw ConfigError(g.config_path + ": config must be a JSON object");
  }
  apply_overrides(cfg, g.sets);
  return cfg;
}

void check_known_keys(const json& j, const std::string& prefix,
                      const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ConfigError("unknown config key '" + prefix + key + "'");
  }
}

double get_real(const json& j, const std::string& prefix, const char* key,
                double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number())
    throw ConfigError("config error at " + prefix + key + ": expected a number");
  return j[key].get<double>();
}

std::size_t get_size(const json& j, const std::string& prefix, const char* key,
                     std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ConfigError("config error at " + prefix + key +
                      ": expected a nonnegative integer");
  return j[key].get<std::size_t>();
}

std::uint64_t get_u64(const json& j, const std::string& prefix, const char* key,
                      std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer() || j[key].get<long long>() < 0)
    throw ConfigError("config error at " + prefix + key +
                      ": expected a nonnegative integer");
  return j[key].get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& prefix,
                       const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string())
    throw ConfigError("config error at " + prefix + key + ": expected a string");
  return j[key].get<std::string>();
}

json section(const json& cfg, const char* name) {
  if (!cfg.contains(name)) return json::object();
  if (!cfg[name].is_object())
    throw ConfigError(std::string("config error at ") + name +
                      ": expected an object");
  return cfg[name];
}

SynthConfig parse_synth(const json& cfg, const GlobalArgs& g) {
  const json j = section(cfg, "synth");
  check_known_keys(j, "synth.",
                   {"n_train_videos", "n_val_videos", "segments_per_video",
                    "audio_dim", "video_dim", "text_dim", "interaction_gain",
                    "context_gain", "noise_sigma", "seed"});
  SynthConfig s;
  s.n_train_videos = get_size(j, "synth.", "n_train_videos", s.n_train_videos);
  s.n_val_videos = get_size(j, "synth.", "n_val_videos", s.n_val_videos);
  s.segments_per_video =
      get_size(j, "synth.", "segments_per_video", s.segments_per_video);
  s.audio_dim = get_size(j, "synth.", "audio_dim", s.audio_dim);
  s.video_dim = get_size(j, "synth.", "video_dim", s.video_dim);
  s.text_dim = get_size(j, "synth.", "text_dim", s.text_dim);
  s.interaction_gain =
      get_real(j, "synth.", "interaction_gain", s.interaction_gain);
  s.context_gain = get_real(j, "synth.", "context_gain", s.context_gain);
  s.noise_sigma = get_real(j, "synth.", "noise_sigma", s.noise_sigma);
  s.seed = get_u64(j, "synth.", "seed", s.seed);
  if (g.seed) s.seed = *g.seed;
  return s;
}

// Model section; input dims are measured from the dataset later.
struct ModelSpec {
  Variant variant = Variant::kRtn;
  std::map<std::string, std::size_t> embed_dims;
  std::size_t lstm_hidden = 32;
  std::size_t head_hidden = 32;
  std::uint64_t seed = 0;
};

ModelSpec parse_model(const json& cfg, const GlobalArgs& g) {
  const json j = section(cfg, "model");
  check_known_keys(j, "model.",
                   {"variant", "embed_dim", "modality_embed_dims",
                    "lstm_hidden", "head_hidden", "seed"});
  ModelSpec m;
  m.variant = parse_variant(get_string(j, "model.", "variant", "rtn"));
  const std::size_t embed_all = get_size(j, "model.", "embed_dim", 6);
  for (const char* mod : kModalityOrder) m.embed_dims[mod] = embed_all;
  if (j.contains("modality_embed_dims")) {
    const json& je = j["modality_embed_dims"];
    if (!je.is_object())
      throw ConfigError(
          "config error at model.modality_embed_dims: expected an object");
    check_known_keys(je, "model.modality_embed_dims.",
                     {"audio", "video", "text"});
    for (const char* mod : kModalityOrder)
      m.embed_dims[mod] =
          get_size(je, "model.modality_embed_dims.", mod, m.embed_dims[mod]);
  }
  m.lstm_hidden = get_size(j, "model.", "lstm_hidden", m.lstm_hidden);
  m.head_hidden = get_size(j, "model.", "head_hidden", m.head_hidden);
  m.seed = get_u64(j, "model.", "seed", m.seed);
  if (g.seed) m.seed = *g.seed;
  return m;
}

TrainConfig parse_train(const json& cfg, const GlobalArgs& g) {
  const json j = section(cfg, "train");
  check_known_keys(j, "train.",
                   {"learning_rate", "beta1", "beta2", "epsilon", "max_epochs",
                    "patience", "batch", "seed", "emotion_loss_weight"});
  TrainConfig t;
  t.learning_rate = get_real(j, "train.", "learning_rate", t.learning_rate);
  t.beta1 = get_real(j, "train.", "beta1", t.beta1);
  t.beta2 = get_real(j, "train.", "beta2", t.beta2);
  t.epsilon = get_real(j, "train.", "epsilon", t.epsilon);
  t.max_epochs = get_size(j, "train.", "max_epochs", t.max_epochs);
  t.patience = get_size(j, "train.", "patience", t.patience);
  t.batch = get_size(j, "train.", "batch", t.batch);
  t.seed = get_u64(j, "train.", "seed", t.seed);
  t.emotion_loss_weight =
      get_real(j, "train.", "emotion_loss_weight", t.emotion_loss_weight);
  if (g.seed) t.seed = *g.seed;
  return t;
}

void reject_unknown_sections(const json& cfg) {
  check_known_keys(cfg, "", {"synth", "model", "train", "compare"});
}

std::string config_hash(const json& effective) {
  return hex64(fnv1a64(effective.dump()));
}

// --- shared command helpers --------------------------------------------------

ModelConfig make_model_config(const ModelSpec& spec, const Dataset& data) {
  if (data.empty() || data.front().segments.empty())
    throw DataError("dataset has no segments");
  const SegmentRecord& first = data.front().segments.front();
  ModelConfig cfg;
  cfg.variant = spec.variant;
  cfg.lstm_hidden = spec.lstm_hidden;
  cfg.head_hidden = spec.head_hidden;
  cfg.seed = spec.seed;
  const std::map<std::string, std::size_t> dims = {
      {"audio", first.audio.size()},
      {"video", first.video.size()},
      {"text", first.text.size()}};
  for (const std::string& mod : required_modalities(spec.variant)) {
    const std::size_t d = dims.at(mod);
    if (d == 0)
      throw DataError("variant " + std::string(variant_name(spec.variant)) +
                      " needs modality '" + mod +
                      "' but the dataset has dim 0 for it");
    cfg.modality_input_dims[mod] = d;
    cfg.modality_embed_dims[mod] = spec.embed_dims.at(mod);
  }
  return cfg;
}

Dataset load_dataset_arg(const std::string& path, bool lenient,
                         const char* role) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= std::string(role) + ".jsonl";
  return load_dataset(p.string(), lenient);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

// --- subcommand implementations ----------------------------------------------

int cmd_gen_data(const GlobalArgs& g, const std::string& out_dir) {
  const json cfg = load_config(g);
  reject_unknown_sections(cfg);
  const SynthConfig synth = parse_synth(cfg, g);
  auto [train_set, val_set] = gen_synthetic(synth);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_dataset(train_set, (dir / "train.jsonl").string());
  write_dataset(val_set, (dir / "val.jsonl").string());

  json effective;
  effective["n_train_videos"] = synth.n_train_videos;
  effective["n_val_videos"] = synth.n_val_videos;
  effective["segments_per_video"] = synth.segments_per_video;
  effective["audio_dim"] = synth.audio_dim;
  effective["video_dim"] = synth.video_dim;
  effective["text_dim"] = synth.text_dim;
  effective["interaction_gain"] = synth.interaction_gain;
  effective["context_gain"] = synth.context_gain;
  effective["noise_sigma"] = synth.noise_sigma;
  effective["seed"] = synth.seed;

  auto count_records = [](const Dataset& d) {
    std::size_t n = 0;
    for (const auto& v : d) n += v.segments.size();
    return n;
  };
  json manifest;
  manifest["config"] = effective;
  manifest["config_hash"] = config_hash(effective);
  manifest["seed"] = synth.seed;
  manifest["files"] = {{"train", "train.jsonl"}, {"val", "val.jsonl"}};
  manifest["train_videos"] = train_set.size();
  manifest["train_records"] = count_records(train_set);
  manifest["val_videos"] = val_set.size();
  manifest["val_records"] = count_records(val_set);
  write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  std::cout << "wrote " << train_set.size() << " train / " << val_set.size()
            << " val videos to " << out_dir << " (config "
            << manifest["config_hash"].get<std::string>() << ")\n";
  return 0;
}

int cmd_train(const GlobalArgs& g, const std::string& data_path,
              const std::string& ckpt_path, std::string log_path) {
  const json cfg = load_config(g);
  reject_unknown_sections(cfg);
  const ModelSpec spec = parse_model(cfg, g);
  const TrainConfig tcfg = parse_train(cfg, g);

  const Dataset train_set = load_dataset_arg(data_path, g.lenient, "train");
  const Dataset val_set = load_dataset_arg(data_path, g.lenient, "val");
  const ModelConfig mcfg = make_model_config(spec, train_set);

  const Model init = build_model(mcfg);
  auto [best, log] = train(init, train_set, val_set, tcfg);
  save_checkpoint(best, ckpt_path);
  if (log_path.empty()) log_path = ckpt_path + ".log.json";
  write_text_file(log_path, train_log_to_json(log).dump(2) + "\n");

  const MetricsReport report = evaluate_model(best, val_set);
  std::cout << "variant " << variant_name(mcfg.variant) << ", "
            << init.param_count() << " parameters, best epoch "
            << log.best_epoch << " (" << log.stop_reason << ")\n"
            << report_table(report);
  return 0;
}

int cmd_eval(const GlobalArgs& g, const std::string& ckpt_path,
             const std::string& data_path, std::string json_path) {
  const Model model = load_checkpoint(ckpt_path);
  const Dataset data = load_dataset_arg(data_path, g.lenient, "val");
  const MetricsReport report = evaluate_model(model, data);
  std::cout << report_table(report);
  if (json_path.empty()) json_path = ckpt_path + ".metrics.json";
  write_text_file(json_path, report_to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_compare(const GlobalArgs& g, const std::string& data_path,
                std::vector<std::string> variants,
                std::vector<std::uint64_t> seeds, std::string json_path) {
  const json cfg = load_config(g);
  reject_unknown_sections(cfg);
  const json jc = section(cfg, "compare");
  check_known_keys(jc, "compare.", {"variants", "seeds"});
  if (variants.empty() && jc.contains("variants"))
    variants = jc["variants"].get<std::vector<std::string>>();
  if (seeds.empty() && jc.contains("seeds"))
    seeds = jc["seeds"].get<std::vector<std::uint64_t>>();
  if (variants.empty()) variants = {"early_fusion", "tfn", "rtn"};
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
  if (variants.size() < 2)
    throw ConfigError("compare needs at least 2 variants, got " +
                      std::to_string(variants.size()));

  ModelSpec spec = parse_model(cfg, g);
  TrainConfig tcfg = parse_train(cfg, g);
  const Dataset train_set = load_dataset_arg(data_path, g.lenient, "train");
  const Dataset val_set = load_dataset_arg(data_path, g.lenient, "val");

  const double majority = majority_binary_accuracy(train_set, val_set);

  struct Cell {
    MetricsReport report;
  };
  json rows = json::array();
  std::ostringstream table;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-18s %-18s %-18s %-18s\n",
                "variant", "binary_acc", "binary_f1", "acc7", "mae");
  table << line;

  for (const std::string& vname : variants) {
    spec.variant = parse_variant(vname);
    std::vector<MetricsReport> reports;
    for (std::uint64_t seed : seeds) {
      spec.seed = seed;
      tcfg.seed = seed;
      const ModelConfig mcfg = make_model_config(spec, train_set);
      auto [best, log] = train(build_model(mcfg), train_set, val_set, tcfg);
      reports.push_back(evaluate_model(best, val_set));
    }
    auto mean_sd = [&](auto pick) {
      double mean = 0.0;
      for (const auto& r : reports) mean += pick(r);
      mean /= static_cast<double>(reports.size());
      double var = 0.0;
      for (const auto& r : reports) {
        const double d = pick(r) - mean;
        var += d * d;
      }
      const double sd =
          reports.size() > 1
              ? std::sqrt(var / static_cast<double>(reports.size() - 1))
              : 0.0;
      return std::make_pair(mean, sd);
    };
    const auto [acc_m, acc_s] =
        mean_sd([](const MetricsReport& r) { return r.binary_acc; });
    const auto [f1_m, f1_s] =
        mean_sd([](const MetricsReport& r) { return r.binary_f1; });
    const auto [a7_m, a7_s] =
        mean_sd([](const MetricsReport& r) { return r.acc7; });
    const auto [mae_m, mae_s] =
        mean_sd([](const MetricsReport& r) { return r.sentiment_mae; });

    auto fmt_cell = [&](double m, double s) {
      char buf[64];
      if (seeds.size() > 1)
        std::snprintf(buf, sizeof(buf), "%.4f+-%.4f", m, s);
      else
        std::snprintf(buf, sizeof(buf), "%.4f", m);
      return std::string(buf);
    };
    std::snprintf(line, sizeof(line), "%-14s %-18s %-18s %-18s %-18s\n",
                  vname.c_str(), fmt_cell(acc_m, acc_s).c_str(),
                  fmt_cell(f1_m, f1_s).c_str(), fmt_cell(a7_m, a7_s).c_str(),
                  fmt_cell(mae_m, mae_s).c_str());
    table << line;

    json row;
    row["variant"] = vname;
    row["seeds"] = seeds;
    json per_seed = json::array();
    for (const auto& r : reports) per_seed.push_back(report_to_json(r));
    row["per_seed"] = per_seed;
    row["binary_acc_mean"] = acc_m;
    row["binary_acc_sd"] = acc_s;
    row["binary_f1_mean"] = f1_m;
    row["acc7_mean"] = a7_m;
    row["sentiment_mae_mean"] = mae_m;
    rows.push_back(row);
  }
  std::snprintf(line, sizeof(line), "%-14s %.4f\n", "majority", majority);
  table << line;
  std::cout << table.str();

  if (!json_path.empty()) {
    json doc;
    doc["majority_binary_acc"] = majority;
    doc["rows"] = rows;
    write_text_file(json_path, doc.dump(2) + "\n");
  }
  return 0;
}

int cmd_extract_audio(const GlobalArgs& g, const std::string& mode,
                      const std::string& frames_path,
                      const std::string& posteriors_path,
                      const std::string& state_map_path,
                      const std::string& ubm_path, const std::string& tv_path,
                      std::size_t fit_ubm, std::size_t fit_tv,
                      std::size_t em_iters, const std::string& out_path) {
  (void)g;
  std::ostringstream out;
  if (mode == "phoneme") {
    if (posteriors_path.empty() || state_map_path.empty())
      throw ConfigError("phoneme mode needs --posteriors and --state-map");
    if (!fs::exists(state_map_path))
      throw ConfigError("state map file not found: " + state_map_path);
    const StateMap map = load_state_map(state_map_path);
    for (const auto& [utt, posteriors] : load_posteriors_file(posteriors_path)) {
      if (posteriors.rows == 0)
        throw DataError("utterance '" + utt + "' has no frames");
      const Tensor feat = phoneme_stats(monophone_posteriors(posteriors, map));
      ordered_json j;
      j["utt"] = utt;
      j["features"] = feat.values();
      out << j.dump() << "\n";
    }
  } else if (mode == "ivector") {
    if (frames_path.empty()) throw ConfigError("ivector mode needs --frames");
    const auto utterances = load_frames_file(frames_path);
    for (const auto& [utt, frames] : utterances)
      if (frames.empty()) throw DataError("utterance '" + utt + "' has no frames");

    Ubm ubm;
    TMatrixModel tv;
    if (fit_ubm > 0) {
      Frames pooled;
      for (const auto& [utt, frames] : utterances)
        pooled.insert(pooled.end(), frames.begin(), frames.end());
      ubm = ubm_fit(pooled, fit_ubm, em_iters, 0);
      if (!ubm_path.empty()) save_ubm(ubm, ubm_path);
    } else {
      if (ubm_path.empty() || !fs::exists(ubm_path))
        throw ConfigError("UBM model file not found: " +
                          (ubm_path.empty() ? "<missing --ubm>" : ubm_path));
      ubm = load_ubm(ubm_path);
    }
    if (fit_tv > 0) {
      std::vector<BwStats> all_stats;
      for (const auto& [utt, frames] : utterances)
        all_stats.push_back(
            bw_stats(gmm_posteriors(ubm, frames), frames, ubm));
      tv = tv_train(all_stats, ubm, fit_tv, em_iters, 0);
      if (!tv_path.empty()) save_tv(tv, tv_path);
    } else {
      if (tv_path.empty() || !fs::exists(tv_path))
        throw ConfigError("total-variability model file not found: " +
                          (tv_path.empty() ? "<missing --tv>" : tv_path));
      tv = load_tv(tv_path);
    }
    for (const auto& [utt, frames] : utterances) {
      const BwStats stats =
          bw_stats(gmm_posteriors(ubm, frames), frames, ubm);
      const IVector w = extract_ivector(stats, tv, ubm);
      ordered_json j;
      j["utt"] = utt;
      j["features"] = w.w;
      out << j.dump() << "\n";
    }
  } else {
    throw ConfigError("unknown extract-audio mode '" + mode +
                      "' (expected phoneme or ivector)");
  }
  write_text_file(out_path, out.str());
  std::cout << "wrote features to " << out_path << "\n";
  return 0;
}

int cmd_extract_text(const GlobalArgs& g, const std::string& transcripts_path,
                     const std::string& word_vectors_path,
                     const std::string& lexicon_path,
                     const std::string& valence_path,
                     const std::string& boosters_path,
                     const std::string& negators_path, bool use_lexicon,
                     bool use_rule, bool use_contextual,
                     const std::string& out_path) {
  (void)g;
  const auto word_vectors = load_word_vectors(word_vectors_path);
  Lexicon lexicon;
  if (use_lexicon) {
    if (lexicon_path.empty()) throw ConfigError("--use-lexicon needs --lexicon");
    lexicon = load_lexicon(lexicon_path, fs::path(lexicon_path).stem().string());
  }
  RuleScorerConfig rule_cfg;
  if (use_rule) {
    if (valence_path.empty()) throw ConfigError("--use-rule needs --valence");
    rule_cfg.valence = load_valence(valence_path);
    if (!boosters_path.empty()) rule_cfg.boosters = load_word_list(boosters_path);
    if (!negators_path.empty()) rule_cfg.negators = load_word_list(negators_path);
  }

  std::ifstream in(transcripts_path);
  if (!in) throw DataError("cannot open file: " + transcripts_path);
  std::ostringstream out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where =
        transcripts_path + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("utt") ||
        !j.contains("tokens"))
      throw ParseError(where + ": expected {\"utt\": id, \"tokens\": [...]}");
    std::vector<std::string> tokens;
    for (const auto& t : j["tokens"]) {
      if (!t.is_string()) throw ParseError(where + ": tokens must be strings");
      tokens.push_back(t.get<std::string>());
    }
    std::vector<Tensor> contextual;
    if (use_contextual) {
      if (!j.contains("contextual"))
        throw DataError(where + ": --use-contextual set but line has no "
                        "'contextual' field");
      for (const auto& row : j["contextual"])
        contextual.push_back(Tensor::vec(row.get<std::vector<double>>()));
    }
    try {
      const Tensor feat = segment_text_vector(
          tokens, word_vectors, use_lexicon ? &lexicon : nullptr,
          use_contextual ? &contextual : nullptr,
          use_rule ? &rule_cfg : nullptr);
      ordered_json rec;
      rec["utt"] = j["utt"];
      rec["features"] = feat.values();
      out << rec.dump() << "\n";
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  write_text_file(out_path, out.str());
  std::cout << "wrote features to " << out_path << "\n";
  return 0;
}

int cmd_gradcheck(const GlobalArgs& g, bool inject_fault) {
  const std::uint64_t seed = g.seed ? *g.seed : 7;
  const auto rows = run_gradient_suite(seed, inject_fault);
  bool all_pass = true;
  std::vector<std::string> failing;
  for (const GradCheckRow& row : rows) {
    std::printf("%-20s %12.3e  %s\n", row.component.c_str(),
                row.worst_rel_err, row.pass ? "PASS" : "FAIL");
    if (!row.pass) {
      all_pass = false;
      failing.push_back(row.component);
    }
  }
  if (!all_pass) {
    std::ostringstream msg;
    msg << "gradient check failed:";
    for (const std::string& f : failing) msg << " " << f;
    std::cout << msg.str() << "\n";
    return 1;
  }
  std::cout << "all gradient checks passed (tolerance " << kGradCheckTol
            << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "rtnlab: multimodal segment-level sentiment/emotion toolkit "
      "(tensor-fusion models, rule/lexicon text features, i-vector and "
      "phoneme audio features)"};
  app.require_subcommand(1);

  GlobalArgs g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value,
                                  "Override every configured seed");
  app.add_option("--config", g.config_path, "JSON configuration document")
      ->check(CLI::ExistingFile);
  app.add_option("--set", g.sets,
                 "Override a config value, e.g. --set synth.noise_sigma=0.2");
  app.add_flag("--lenient", g.lenient,
               "Accept unknown fields in dataset files");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a planted synthetic dataset");
  std::string gen_out = "data";
  gen->add_option("--out", gen_out, "Output directory");

  // train
  auto* tr = app.add_subcommand("train", "Train one model variant");
  std::string tr_data, tr_ckpt = "model.ckpt.json", tr_log;
  tr->add_option("--data", tr_data, "Dataset directory (train.jsonl/val.jsonl)")
      ->required();
  tr->add_option("--out", tr_ckpt, "Checkpoint output path");
  tr->add_option("--log", tr_log, "Training log output path");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
  std::string ev_ckpt, ev_data, ev_json;
  ev->add_option("--ckpt", ev_ckpt, "Checkpoint path")->required();
  ev->add_option("--data", ev_data, "Dataset file or directory")->required();
  ev->add_option("--json", ev_json, "Metrics JSON output path");

  // compare
  auto* cp = app.add_subcommand("compare",
                            "Train multiple variants across seeds and "
                            "summarize their metrics");
  std::string cp_data, cp_json;
  std::vector<std::string> cp_variants;
  std::vector<std::uint64_t> cp_seeds;
  cp->add_option("--data", cp_data, "Dataset directory")->required();
  cp->add_option("--variants", cp_variants, "Variants to compare")
      ->delimiter(',');
  cp->add_option("--seeds", cp_seeds, "Seeds per variant")->delimiter(',');
  cp->add_option("--json", cp_json, "Comparison JSON output path");

  // extract-audio
  auto* xa = app.add_subcommand("extract-audio",
                            "Per-utterance phoneme statistics or i-vectors");
  std::string xa_mode, xa_frames, xa_posteriors, xa_map, xa_ubm, xa_tv,
      xa_out = "audio_features.jsonl";
  std::size_t xa_fit_ubm = 0, xa_fit_tv = 0, xa_iters = 10;
  xa->add_option("--mode", xa_mode, "phoneme or ivector")->required();
  xa->add_option("--frames", xa_frames, "Frame-feature JSONL file");
  xa->add_option("--posteriors", xa_posteriors, "Posteriorgram JSONL file");
  xa->add_option("--state-map", xa_map, "State-to-phone map file");
  xa->add_option("--ubm", xa_ubm, "UBM model file (input, or output with --fit-ubm)");
  xa->add_option("--tv", xa_tv,
                 "Total-variability model file (input, or output with --fit-tv)");
  xa->add_option("--fit-ubm", xa_fit_ubm,
                 "Fit a UBM with this many components first");
  xa->add_option("--fit-tv", xa_fit_tv, "Fit a T matrix with this rank first");
  xa->add_option("--em-iters", xa_iters, "EM iterations for --fit-*");
  xa->add_option("--out", xa_out, "Feature JSONL output path");

  // extract-text
  auto* xt = app.add_subcommand("extract-text",
                            "Per-utterance text vectors from transcripts");
  std::string xt_transcripts, xt_wv, xt_lex, xt_val, xt_boost, xt_neg,
      xt_out = "text_features.jsonl";
  bool xt_use_lex = false, xt_use_rule = false, xt_use_ctx = false;
  xt->add_option("--transcripts", xt_transcripts, "Transcript JSONL file")
      ->required();
  xt->add_option("--word-vectors", xt_wv, "word<TAB>v1,v2,... file")
      ->required();
  xt->add_option("--lexicon", xt_lex, "Lexicon TSV file");
  xt->add_option("--valence", xt_val, "Valence TSV file");
  xt->add_option("--boosters", xt_boost, "Booster word list");
  xt->add_option("--negators", xt_neg, "Negator word list");
  xt->add_flag("--use-lexicon", xt_use_lex, "Append lexicon scores");
  xt->add_flag("--use-rule", xt_use_rule, "Append the rule-based score");
  xt->add_flag("--use-contextual", xt_use_ctx, "Append contextual vectors");
  xt->add_option("--out", xt_out, "Feature JSONL output path");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Run the gradient-check suite");
  bool gc_fault = false;
  gc->add_flag("--inject-fault", gc_fault,
               "Add a deliberately wrong gradient (negative control)");

  for (auto* sub : {gen, tr, ev, cp, xa, xt, gc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (gen->parsed()) return cmd_gen_data(g, gen_out);
    if (tr->parsed()) return cmd_train(g, tr_data, tr_ckpt, tr_log);
    if (ev->parsed()) return cmd_eval(g, ev_ckpt, ev_data, ev_json);
    if (cp->parsed()) return cmd_compare(g, cp_data, cp_variants, cp_seeds, cp_json);
    if (xa->parsed())
      return cmd_extract_audio(g, xa_mode, xa_frames, xa_posteriors, xa_map,
                               xa_ubm, xa_tv, xa_fit_ubm, xa_fit_tv, xa_iters,
                               xa_out);
    if (xt->parsed())
      return cmd_extract_text(g, xt_transcripts, xt_wv, xt_lex, xt_val,
                              xt_boost, xt_neg, xt_use_lex, xt_use_rule,
                              xt_use_ctx, xt_out);
    if (gc->parsed()) return cmd_gradcheck(g, gc_fault);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
