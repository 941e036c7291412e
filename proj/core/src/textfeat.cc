// core/src/textfeat.cc

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

#include "rtnlab/textfeat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rtnlab/errors.hpp"

namespace rtnlab {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// All-caps = at least one alphabetic character and no lowercase ones.
bool is_all_caps(const std::string& token) {
  bool has_alpha = false;
  for (unsigned char c : token) {
    if (std::isalpha(c)) {
      has_alpha = true;
      if (std::islower(c)) return false;
    }
  }
  return has_alpha;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& path,
                                      std::size_t line_no) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      double v = std::stod(item, &pos);
      while (pos < item.size() && std::isspace(static_cast<unsigned char>(item[pos]))) ++pos;
      if (pos != item.size()) throw std::invalid_argument(item);
      if (!std::isfinite(v)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": bad number '" + item + "'");
    }
  }
  if (out.empty())
    throw ParseError(path + ":" + std::to_string(line_no) + ": empty score list");
  return out;
}

// Shared reader for `word<TAB>v1,v2,...` files with a consistent vector width.
std::unordered_map<std::string, std::vector<double>> load_tsv_vectors(
    const std::string& path, std::size_t* width_out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::unordered_map<std::string, std::vector<double>> entries;
  std::size_t width = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected 'word<TAB>scores'");
    const std::string word = lower_ascii(line.substr(0, tab));
    std::vector<double> scores =
        parse_number_list(line.substr(tab + 1), path, line_no);
    if (width == 0) width = scores.size();
    if (scores.size() != width)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " scores, got " +
                       std::to_string(scores.size()));
    entries[word] = std::move(scores);
  }
  if (width_out) *width_out = width;
  return entries;
}

}  // namespace

std::string lower_ascii(const std::string& word) {
  std::string out = word;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

Tensor lexicon_embed(const std::string& word, const Tensor& base,
                     const Lexicon& lex) {
  std::vector<double> out = base.values();
  auto it = lex.entries.find(lower_ascii(word));
  if (it != lex.entries.end()) {
    out.insert(out.end(), it->second.begin(), it->second.end());
  } else {
    out.insert(out.end(), lex.width, 0.0);
  }
  const std::size_t n = out.size();
  return Tensor({n}, std::move(out));
}

double rule_score(const std::vector<std::string>& tokens,
                  const RuleScorerConfig& cfg) {
  if (cfg.norm_alpha <= 0.0) throw ArgumentError("rule_score: norm_alpha must be > 0");
  if (cfg.exclamation_cap < 0)
    throw ArgumentError("rule_score: exclamation_cap must be >= 0");

  // Caps emphasis applies only when the text mixes cased styles.
  bool any_caps = false, any_non_caps = false;
  for (const std::string& t : tokens) {
    if (is_all_caps(t))
      any_caps = true;
    else
      any_non_caps = true;
  }
  const bool mixed_case = any_caps && any_non_caps;

  double x = 0.0;
  int exclamations = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (char c : tokens[i]) exclamations += (c == '!');
    const std::string word = lower_ascii(tokens[i]);
    auto hit = cfg.valence.find(word);
    if (hit == cfg.valence.end()) continue;
    double v = hit->second;

    bool boosted = false, negated = false;
    for (std::size_t back = 1; back <= 3 && back <= i; ++back) {
      const std::string prev = lower_ascii(tokens[i - back]);
      if (back <= 2 && cfg.boosters.count(prev)) boosted = true;
      if (cfg.negators.count(prev)) negated = true;
    }
    if (boosted) v += sign(v) * cfg.booster_increment;
    if (negated) v *= cfg.negation_factor;
    if (mixed_case && is_all_caps(tokens[i])) v *= 1.0 + cfg.caps_boost;
    x += v;
  }

  const int ep = std::min(exclamations, cfg.exclamation_cap);
  x += sign(x) * cfg.exclamation_boost * static_cast<double>(ep);
  return x / std::sqrt(x * x + cfg.norm_alpha);
}

Tensor segment_text_vector(
    const std::vector<std::string>& tokens,
    const std::unordered_map<std::string, Tensor>& word_vectors,
    const Lexicon* lex, const std::vector<Tensor>* contextual,
    const RuleScorerConfig* rule_cfg) {
  if (contextual && contextual->size() != tokens.size())
    throw DimensionError("segment_text_vector: " +
                         std::to_string(contextual->size()) +
                         " contextual vectors for " +
                         std::to_string(tokens.size()) + " tokens");

  std::vector<double> acc;
  std::size_t resolved = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = word_vectors.find(lower_ascii(tokens[i]));
    if (it == word_vectors.end()) continue;
    Tensor per_token = it->second;
    if (lex) per_token = lexicon_embed(tokens[i], per_token, *lex);
    if (contextual) per_token = concat({per_token, (*contextual)[i]});
    if (acc.empty()) acc.assign(per_token.size(), 0.0);
    if (per_token.size() != acc.size())
      throw DimensionError("segment_text_vector: token vector length " +
                           std::to_string(per_token.size()) +
                           " != " + std::to_string(acc.size()));
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += per_token[k];
    ++resolved;
  }
  if (resolved == 0)
    throw DataError("segment_text_vector: no token has a word vector");
  for (double& v : acc) v /= static_cast<double>(resolved);
  if (rule_cfg) acc.push_back(rule_score(tokens, *rule_cfg));
  const std::size_t n = acc.size();
  return Tensor({n}, std::move(acc));
}

Lexicon load_lexicon(const std::string& path, const std::string& name) {
  Lexicon lex;
  lex.name = name;
  lex.entries = load_tsv_vectors(path, &lex.width);

  // Min-max normalize each category to [-1, 1]; degenerate categories -> 0.
  std::vector<double> lo(lex.width, std::numeric_limits<double>::infinity());
  std::vector<double> hi(lex.width, -std::numeric_limits<double>::infinity());
  for (const auto& [word, scores] : lex.entries)
    for (std::size_t k = 0; k < lex.width; ++k) {
      lo[k] = std::min(lo[k], scores[k]);
      hi[k] = std::max(hi[k], scores[k]);
    }
  for (auto& [word, scores] : lex.entries)
    for (std::size_t k = 0; k < lex.width; ++k) {
      const double range = hi[k] - lo[k];
      scores[k] = range > 0.0 ? -1.0 + 2.0 * (scores[k] - lo[k]) / range : 0.0;
    }
  return lex;
}

std::unordered_map<std::string, double> load_valence(const std::string& path) {
  std::size_t width = 0;
  auto vectors = load_tsv_vectors(path, &width);
  if (width != 1)
    throw ParseError(path + ": valence lexicon must have exactly one score per word");
  std::unordered_map<std::string, double> out;
  for (const auto& [word, scores] : vectors) out[word] = scores[0];
  return out;
}

std::unordered_set<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(lower_ascii(line));
  }
  return out;
}

std::unordered_map<std::string, Tensor> load_word_vectors(
    const std::string& path) {
  std::size_t width = 0;
  auto raw = load_tsv_vectors(path, &width);
  std::unordered_map<std::string, Tensor> out;
  for (auto& [word, values] : raw) {
    const std::size_t n = values.size();
    out.emplace(word, Tensor({n}, std::move(values)));
  }
  return out;
}

}  // namespace rtnlab
