// rtnlab/trainer.hpp

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

// L1 loss, bias-corrected Adam, early stopping on validation sentiment MAE,
// the text-feature ablation runner, and the gradient-check suite.

#ifndef RTNLAB_TRAINER_HPP_
#define RTNLAB_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtnlab/dataio.hpp"
#include "rtnlab/evalmetrics.hpp"
#include "rtnlab/models.hpp"
#include "rtnlab/ndtensor.hpp"
#include "rtnlab/textfeat.hpp"

namespace rtnlab {

struct TrainConfig {
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t max_epochs = 70;
  std::size_t patience = 70;
  std::size_t batch = 8;  // videos per optimizer step
  std::uint64_t seed = 0;
  double emotion_loss_weight = 0.5;
};

// Gradients are clipped to this global L2 norm before every Adam step.
inline constexpr double kGradClipNorm = 5.0;

struct TrainLog {
  std::vector<double> train_loss;  // one entry per epoch, from epoch 0
  std::vector<double> val_mae;
  std::size_t best_epoch = 0;
  std::string stop_reason;  // "early_stop" or "max_epochs"
};

nlohmann::json train_log_to_json(const TrainLog& log);

// mean |sentiment error| + w_emo * mean |emotion error|; differentiable
// through the predictions. Lists must be aligned.
Tensor loss(const std::vector<TapedPrediction>& preds,
            const std::vector<SegmentRecord>& gold, double w_emo);

struct AdamState {
  std::size_t step = 0;
  std::vector<std::vector<double>> m;  // first moments, one per parameter
  std::vector<std::vector<double>> v;  // second moments
};

// Standard bias-corrected Adam update, in place. State is initialized on
// first use; afterwards shapes must match.
void adam_step(const std::vector<Tensor*>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state,
               const TrainConfig& cfg);

// Stops once the monitored value has failed to improve for more than
// `patience` consecutive epochs.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  // Feed one epoch's validation value; returns true when training should
  // stop. Epochs must arrive in order from 0.
  bool observe(std::size_t epoch, double value) {
    if (value < best_) {
      best_ = value;
      best_epoch_ = epoch;
      wait_ = 0;
      improved_ = true;
      return false;
    }
    improved_ = false;
    return ++wait_ > patience_;
  }

  bool improved_last() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t wait_ = 0;
  bool improved_ = false;
};

// Trains a copy of `init`, shuffling video order every epoch (seeded),
// validating on sentiment MAE after each epoch, and returning the
// best-validation snapshot plus the log. Bit-deterministic for a fixed
// (seed, config, dataset) triple.
std::pair<Model, TrainLog> train(const Model& init, const Dataset& train_videos,
                                 const Dataset& val_videos,
                                 const TrainConfig& cfg);

// Binary accuracy on `eval_videos` of always predicting the training set's
// majority sentiment sign.
double majority_binary_accuracy(const Dataset& train_videos,
                                const Dataset& eval_videos);

// --- text-feature ablation ---------------------------------------------------

struct FeatureFlags {
  bool use_lexicon = false;
  bool use_rule = false;
  bool use_contextual = false;

  std::string label() const;  // e.g. "emb", "emb+lex+rule"
};

struct TranscriptSegment {
  std::vector<std::string> tokens;
  std::vector<Tensor> contextual;  // aligned with tokens; may be empty
};

// video_id -> one transcript per segment, in segment order.
using TranscriptMap = std::map<std::string, std::vector<TranscriptSegment>>;

struct TextResources {
  std::unordered_map<std::string, Tensor> word_vectors;
  Lexicon lexicon;
  RuleScorerConfig rule_cfg;
};

// Replaces every segment's text vector according to the flags.
Dataset apply_text_features(const Dataset& videos,
                            const TranscriptMap& transcripts,
                            const TextResources& res,
                            const FeatureFlags& flags);

struct AblationRow {
  FeatureFlags flags;
  MetricsReport metrics;
};

// One trained-and-evaluated row per feature combination, in grid order; any
// row failure aborts with the failing combination named. The model's text
// input dim is recomputed per row.
std::vector<AblationRow> run_ablation(const Dataset& train_videos,
                                      const Dataset& val_videos,
                                      const TranscriptMap& transcripts,
                                      const TextResources& res,
                                      const std::vector<FeatureFlags>& grid,
                                      ModelConfig model_cfg,
                                      const TrainConfig& train_cfg);

// --- gradient-check suite ----------------------------------------------------

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTol = 1e-4;
inline constexpr std::size_t kGradCheckDraws = 20;

struct GradCheckRow {
  std::string component;
  double worst_rel_err = 0.0;
  bool pass = false;
};

// Checks analytic gradients of every differentiable component against
// central differences over kGradCheckDraws random draws each. When
// `inject_fault` is set, an extra component with a deliberately wrong
// backward closure is included; the suite must flag it.
std::vector<GradCheckRow> run_gradient_suite(std::uint64_t seed,
                                             bool inject_fault = false);

}  // namespace rtnlab

#endif  // RTNLAB_TRAINER_HPP_
