// rtnlab/textfeat.hpp

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

// Text-side feature engineering: psycholinguistic lexicon embeddings and a
// simplified rule-based (VADER-style) segment sentiment score.

#ifndef RTNLAB_TEXTFEAT_HPP_
#define RTNLAB_TEXTFEAT_HPP_

#include <cstddef>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rtnlab/ndtensor.hpp"

namespace rtnlab {

// A word -> category-score lexicon. Every entry has the same width; scores
// are min-max normalized per category to [-1, 1] at load time.
struct Lexicon {
  std::string name;
  std::size_t width = 0;
  std::unordered_map<std::string, std::vector<double>> entries;
};

// Constants for the rule scorer. Defaults follow the public VADER reference
// implementation; the word sets (valence, boosters, negators) are supplied by
// the caller or loaded from files.
struct RuleScorerConfig {
  std::unordered_map<std::string, double> valence;
  std::unordered_set<std::string> boosters;
  std::unordered_set<std::string> negators;
  double booster_increment = 0.293;
  double negation_factor = -0.74;
  double exclamation_boost = 0.292;
  int exclamation_cap = 3;
  double caps_boost = 0.733;
  double norm_alpha = 15.0;
};

// Returns `base` concatenated with the lexicon scores for `word`, or with
// `lex.width` zeros when the word is absent.
Tensor lexicon_embed(const std::string& word, const Tensor& base,
                     const Lexicon& lex);

// Rule-based sentiment in (-1, 1). Each valence hit is adjusted for a booster
// within the 2 preceding tokens (+/- booster_increment toward its own sign),
// a negator within the 3 preceding tokens (times negation_factor), and
// all-caps emphasis among otherwise mixed-case text (times 1 + caps_boost).
// The summed score x gains sign(x) * exclamation_boost * min(#'!', cap) and
// is normalized to x / sqrt(x^2 + norm_alpha).
double rule_score(const std::vector<std::string>& tokens,
                  const RuleScorerConfig& cfg);

// Mean over resolvable tokens of (word vector ++ lexicon scores ++ contextual
// vector, per the non-null optionals), with the segment rule score appended
// as one extra coordinate when `rule_cfg` is non-null. Tokens missing from
// `word_vectors` are skipped; zero resolvable tokens is a data error. When
// `contextual` is non-null it must be aligned 1:1 with `tokens`.
Tensor segment_text_vector(
    const std::vector<std::string>& tokens,
    const std::unordered_map<std::string, Tensor>& word_vectors,
    const Lexicon* lex, const std::vector<Tensor>* contextual,
    const RuleScorerConfig* rule_cfg);

// --- file loaders (formats documented in the README) -------------------------

// `word<TAB>s1,s2,...,sK`; consistent K enforced; per-category min-max
// normalization to [-1, 1] applied on load (constant categories map to 0).
Lexicon load_lexicon(const std::string& path, const std::string& name);

// `word<TAB>score`, one entry per line.
std::unordered_map<std::string, double> load_valence(const std::string& path);

// One word per line; blank lines and lines starting with '#' are skipped.
std::unordered_set<std::string> load_word_list(const std::string& path);

// `word<TAB>v1,v2,...,vD` with consistent D; used for word embeddings.
std::unordered_map<std::string, Tensor> load_word_vectors(
    const std::string& path);

// Lowercases ASCII letters; used for all word lookups.
std::string lower_ascii(const std::string& word);

}  // namespace rtnlab

#endif  // RTNLAB_TEXTFEAT_HPP_
