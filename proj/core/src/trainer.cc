// core/src/trainer.cc

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

#include "rtnlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rtnlab/errors.hpp"
#include "rtnlab/fusion.hpp"
#include "rtnlab/layers.hpp"
#include "rtnlab/rng.hpp"

namespace rtnlab {

namespace {

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.learning_rate < 0.0)
    throw ConfigError("learning_rate must be >= 0");
  if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0)
    throw ConfigError("beta1 must be in [0, 1)");
  if (cfg.beta2 < 0.0 || cfg.beta2 >= 1.0)
    throw ConfigError("beta2 must be in [0, 1)");
  if (cfg.epsilon <= 0.0) throw ConfigError("epsilon must be > 0");
  if (cfg.max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (cfg.patience == 0) throw ConfigError("patience must be >= 1");
  if (cfg.batch == 0) throw ConfigError("batch must be >= 1");
  if (cfg.emotion_loss_weight < 0.0)
    throw ConfigError("emotion_loss_weight must be >= 0");
}

double val_sentiment_mae(const Model& model, const Dataset& videos) {
  std::vector<double> pred, gold;
  for (const VideoSequence& video : videos) {
    const std::vector<Prediction> preds = forward(model, video);
    for (std::size_t t = 0; t < video.segments.size(); ++t) {
      pred.push_back(preds[t].sentiment);
      gold.push_back(video.segments[t].sentiment);
    }
  }
  return mae(pred, gold);
}

}  // namespace

nlohmann::json train_log_to_json(const TrainLog& log) {
  nlohmann::json j;
  j["train_loss"] = log.train_loss;
  j["val_mae"] = log.val_mae;
  j["best_epoch"] = log.best_epoch;
  j["stop_reason"] = log.stop_reason;
  return j;
}

Tensor loss(const std::vector<TapedPrediction>& preds,
            const std::vector<SegmentRecord>& gold, double w_emo) {
  if (preds.size() != gold.size())
    throw ArgumentError("loss: " + std::to_string(preds.size()) +
                        " predictions vs " + std::to_string(gold.size()) +
                        " gold records");
  if (preds.empty()) throw ArgumentError("loss: empty prediction list");

  std::vector<Tensor> sent_errs, emo_errs;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sent_errs.push_back(
        abs(sub(preds[i].sentiment, Tensor::vec({gold[i].sentiment}))));
    std::vector<double> g(gold[i].emotions.begin(), gold[i].emotions.end());
    emo_errs.push_back(abs(sub(preds[i].emotions, Tensor::vec(g))));
  }
  Tensor total = mean(concat(sent_errs));
  if (w_emo != 0.0)
    total = add(total, scale(mean(concat(emo_errs)), w_emo));
  return total;
}

void adam_step(const std::vector<Tensor*>& params,
               const std::vector<std::vector<double>>& grads, AdamState& state,
               const TrainConfig& cfg) {
  if (params.size() != grads.size())
    throw ArgumentError("adam_step: " + std::to_string(params.size()) +
                        " params vs " + std::to_string(grads.size()) +
                        " gradients");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->size(), 0.0);
      state.v[i].assign(params[i]->size(), 0.0);
    }
  }
  if (state.m.size() != params.size())
    throw ArgumentError("adam_step: optimizer state tracks " +
                        std::to_string(state.m.size()) + " params, got " +
                        std::to_string(params.size()));

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double>& p = params[i]->values();
    const std::vector<double>& g = grads[i];
    if (g.size() != p.size())
      throw DimensionError("adam_step: parameter " + std::to_string(i) +
                           " has " + std::to_string(p.size()) +
                           " values but gradient has " +
                           std::to_string(g.size()));
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

std::pair<Model, TrainLog> train(const Model& init, const Dataset& train_videos,
                                 const Dataset& val_videos,
                                 const TrainConfig& cfg) {
  validate_train_config(cfg);
  if (train_videos.empty()) throw ArgumentError("train: empty training split");
  if (val_videos.empty()) throw ArgumentError("train: empty validation split");

  Model model = init;
  std::vector<Tensor*> params;
  for (auto& [name, t] : model.named_params()) params.push_back(t);

  AdamState adam;
  EarlyStopper stopper(cfg.patience);
  Rng shuffle_rng(cfg.seed);
  Model best = model;
  TrainLog log;

  const std::size_t n_train = train_videos.size();
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch) {
      const std::size_t stop = std::min(start + cfg.batch, n_train);
      Tape tape;
      Model bound = bind_to_tape(model, tape);
      std::vector<Tensor> video_losses;
      for (std::size_t i = start; i < stop; ++i) {
        const VideoSequence& video = train_videos[order[i]];
        video_losses.push_back(loss(forward_taped(bound, video),
                                    video.segments,
                                    cfg.emotion_loss_weight));
      }
      const Tensor batch_loss = mean(concat(video_losses));
      tape.backward(batch_loss);
      loss_sum += batch_loss.item();
      ++n_batches;

      std::vector<std::vector<double>> grads;
      grads.reserve(params.size());
      double norm_sq = 0.0;
      for (auto& [name, t] : bound.named_params()) {
        grads.push_back(tape.grad(*t).values());
        for (double g : grads.back()) norm_sq += g * g;
      }
      const double norm = std::sqrt(norm_sq);
      if (norm > kGradClipNorm) {
        const double s = kGradClipNorm / norm;
        for (auto& g : grads)
          for (double& v : g) v *= s;
      }
      adam_step(params, grads, adam, cfg);
    }

    log.train_loss.push_back(loss_sum / static_cast<double>(n_batches));
    log.val_mae.push_back(val_sentiment_mae(model, val_videos));
    const bool stop_now = stopper.observe(epoch, log.val_mae.back());
    if (stopper.improved_last()) {
      best = model;
      log.best_epoch = epoch;
    }
    if (stop_now) {
      log.stop_reason = "early_stop";
      break;
    }
  }
  if (log.stop_reason.empty()) log.stop_reason = "max_epochs";
  return {std::move(best), std::move(log)};
}

double majority_binary_accuracy(const Dataset& train_videos,
                                const Dataset& eval_videos) {
  std::size_t pos = 0, total = 0;
  for (const VideoSequence& video : train_videos)
    for (const SegmentRecord& rec : video.segments) {
      pos += rec.sentiment > 0.0;
      ++total;
    }
  if (total == 0) throw ArgumentError("majority baseline: empty training set");
  const bool majority_pos = 2 * pos > total;

  std::size_t hits = 0, n = 0;
  for (const VideoSequence& video : eval_videos)
    for (const SegmentRecord& rec : video.segments) {
      hits += (rec.sentiment > 0.0) == majority_pos;
      ++n;
    }
  if (n == 0) throw ArgumentError("majority baseline: empty evaluation set");
  return static_cast<double>(hits) / static_cast<double>(n);
}

std::string FeatureFlags::label() const {
  std::string s = "emb";
  if (use_lexicon) s += "+lex";
  if (use_rule) s += "+rule";
  if (use_contextual) s += "+ctx";
  return s;
}

Dataset apply_text_features(const Dataset& videos,
                            const TranscriptMap& transcripts,
                            const TextResources& res,
                            const FeatureFlags& flags) {
  Dataset out = videos;
  for (VideoSequence& video : out) {
    auto it = transcripts.find(video.video_id);
    if (it == transcripts.end())
      throw DataError("no transcript for video '" + video.video_id + "'");
    if (it->second.size() != video.segments.size())
      throw DataError("video '" + video.video_id + "': " +
                      std::to_string(it->second.size()) +
                      " transcripts for " +
                      std::to_string(video.segments.size()) + " segments");
    for (std::size_t t = 0; t < video.segments.size(); ++t) {
      const TranscriptSegment& seg = it->second[t];
      video.segments[t].text =
          segment_text_vector(
              seg.tokens, res.word_vectors,
              flags.use_lexicon ? &res.lexicon : nullptr,
              flags.use_contextual ? &seg.contextual : nullptr,
              flags.use_rule ? &res.rule_cfg : nullptr)
              .values();
    }
  }
  return out;
}

std::vector<AblationRow> run_ablation(const Dataset& train_videos,
                                      const Dataset& val_videos,
                                      const TranscriptMap& transcripts,
                                      const TextResources& res,
                                      const std::vector<FeatureFlags>& grid,
                                      ModelConfig model_cfg,
                                      const TrainConfig& train_cfg) {
  if (grid.empty()) throw ArgumentError("run_ablation: empty feature grid");
  std::vector<AblationRow> rows;
  for (const FeatureFlags& flags : grid) {
    try {
      const Dataset row_train =
          apply_text_features(train_videos, transcripts, res, flags);
      const Dataset row_val =
          apply_text_features(val_videos, transcripts, res, flags);
      model_cfg.modality_input_dims["text"] =
          row_train.front().segments.front().text.size();
      const Model init = build_model(model_cfg);
      auto [best, log] = train(init, row_train, row_val, train_cfg);
      rows.push_back(AblationRow{flags, evaluate_model(best, row_val)});
    } catch (const Error& e) {
      throw Error("ablation row '" + flags.label() + "' failed: " + e.what());
    }
  }
  return rows;
}

// --- gradient-check suite ----------------------------------------------------

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = rng.gaussian(0.0, scale);
  return Tensor(std::move(shape), std::move(v));
}

// One random instance of a component check: the scalar function and the
// point (per-tensor) it is differentiated at.
struct CheckInstance {
  ScalarFnMulti fn;
  std::vector<Tensor> points;
};

// Central differences at the fixed step have an absolute noise floor of
// roughly 1e-11 x |f| in 64-bit, so a gradient coordinate that lands below
// that floor by cancellation cannot be measured numerically at all, no
// matter how correct the analytic value is. Draws whose smallest analytic
// coordinate falls under the floor are redrawn; the attempt cap turns a
// systematically vanishing gradient (a real backward bug) into a hard
// failure instead of a silent loop.
double check_conditioned(Rng& rng,
                         const std::function<CheckInstance(Rng&)>& draw,
                         const char* what) {
  constexpr int kMaxAttempts = 50;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CheckInstance inst = draw(rng);
    Tape tape;
    std::vector<Tensor> leaves;
    leaves.reserve(inst.points.size());
    for (const Tensor& p : inst.points) leaves.push_back(tape.leaf(p));
    const Tensor y = inst.fn(tape, leaves);
    tape.backward(y);
    double min_coord = std::numeric_limits<double>::infinity();
    for (const Tensor& leaf : leaves) {
      const Tensor g = tape.grad(leaf);
      for (std::size_t i = 0; i < g.size(); ++i)
        min_coord = std::min(min_coord, std::fabs(g[i]));
    }
    const double floor = 1e-6 * std::max(1.0, std::fabs(y.item()));
    if (min_coord < floor) continue;
    return check_gradients(inst.fn, inst.points, kGradCheckStep);
  }
  throw NumericError(
      std::string(what) +
      ": no draw with all gradient coordinates above the finite-difference "
      "noise floor after " + std::to_string(kMaxAttempts) +
      " attempts; a gradient path is likely broken");
}

double check_dense(Rng& rng) {
  return check_conditioned(
      rng,
      [](Rng& r) {
        const std::size_t in = 1 + r.below(4), out = 1 + r.below(4);
        CheckInstance inst;
        inst.points = {random_tensor({in}, r), random_tensor({out, in}, r),
                       random_tensor({out}, r)};
        inst.fn = [](Tape& tape, const std::vector<Tensor>& xs) {
          DenseParams p{xs[1], xs[2]};
          (void)tape;
          return sum(dense_forward(xs[0], p, Activation::kTanh));
        };
        return inst;
      },
      "dense gradient check");
}

double check_lstm_cell(Rng& rng) {
  return check_conditioned(
      rng,
      [](Rng& r) {
        const std::size_t in = 1 + r.below(3), hidden = 1 + r.below(3);
        CheckInstance inst;
        inst.points.push_back(random_tensor({in}, r));      // x
        inst.points.push_back(random_tensor({hidden}, r));  // h
        inst.points.push_back(random_tensor({hidden}, r));  // c
        for (int k = 0; k < 4; ++k)
          inst.points.push_back(random_tensor({hidden, in}, r));
        for (int k = 0; k < 4; ++k)
          inst.points.push_back(random_tensor({hidden, hidden}, r));
        for (int k = 0; k < 4; ++k)
          inst.points.push_back(random_tensor({hidden}, r));
        inst.fn = [](Tape& tape, const std::vector<Tensor>& xs) {
          (void)tape;
          LstmParams p;
          p.w_i = xs[3], p.w_f = xs[4], p.w_o = xs[5], p.w_g = xs[6];
          p.u_i = xs[7], p.u_f = xs[8], p.u_o = xs[9], p.u_g = xs[10];
          p.b_i = xs[11], p.b_f = xs[12], p.b_o = xs[13], p.b_g = xs[14];
          const LstmState next = lstm_cell(xs[0], LstmState{xs[1], xs[2]}, p);
          return sum(add(next.h, next.c));
        };
        return inst;
      },
      "lstm cell gradient check");
}

double check_fusion(Rng& rng) {
  return check_conditioned(
      rng,
      [](Rng& r) {
        const std::size_t arity = 1 + r.below(3);
        CheckInstance inst;
        for (std::size_t m = 0; m < arity; ++m)
          inst.points.push_back(random_tensor({1 + r.below(4)}, r));
        // Weight the fused coordinates so the scalar mixes all entries
        // unevenly.
        std::vector<std::size_t> dims;
        for (const Tensor& t : inst.points) dims.push_back(t.size());
        const std::size_t fused = fused_dim(dims, FusionMode::kTensor);
        const Tensor weights = random_tensor({fused}, r);
        inst.fn = [weights](Tape& tape, const std::vector<Tensor>& xs) {
          (void)tape;
          return sum(mul(tensor_fuse(xs).values, weights));
        };
        return inst;
      },
      "tensor fusion gradient check");
}

// End-to-end check of the training loss through a whole model, checked at a
// moderately scaled random parameter point. Targets sit a bounded distance
// from the point's own predictions: that keeps |loss| small (less FD
// round-off) and every absolute-error term far from its kink. Each target
// coordinate uses one error sign shared by all segments, so the L1 head-bias
// gradients (means of error signs) cannot cancel to an exact zero.
double check_model_loss(Variant variant, Rng& rng) {
  return check_conditioned(
      rng,
      [variant](Rng& r) {
        ModelConfig cfg;
        cfg.variant = variant;
        for (const char* m : kModalityOrder) {
          cfg.modality_input_dims[m] = 2;
          cfg.modality_embed_dims[m] = 2;
        }
        cfg.lstm_hidden = 3;
        cfg.head_hidden = 3;
        cfg.seed = r.next_u64();
        Model base = build_model(cfg);
        for (auto& [name, t] : base.named_params())
          for (std::size_t i = 0; i < t->size(); ++i)
            (*t)[i] = r.uniform(-0.6, 0.6);

        VideoSequence video{"g", {}};
        for (std::size_t t = 0; t < 2; ++t) {
          SegmentRecord rec;
          rec.video_id = "g";
          rec.segment_index = t;
          for (const char* m : kModalityOrder) {
            std::vector<double> v(2);
            for (double& x : v) x = r.gaussian(0.0, 1.0);
            if (std::string(m) == "audio") rec.audio = v;
            else if (std::string(m) == "video") rec.video = v;
            else rec.text = v;
          }
          rec.sentiment = 0.0;
          rec.emotions.fill(0.0);
          video.segments.push_back(rec);
        }
        const std::vector<Prediction> at_point = forward(base, video);
        auto sign = [&r] { return r.below(2) == 0 ? 1.0 : -1.0; };
        const double sent_sign = sign();
        std::array<double, kNumEmotions> emo_signs;
        for (double& s : emo_signs) s = sign();
        for (std::size_t t = 0; t < video.segments.size(); ++t) {
          video.segments[t].sentiment =
              at_point[t].sentiment + sent_sign * r.uniform(0.15, 0.6);
          for (std::size_t e = 0; e < kNumEmotions; ++e)
            video.segments[t].emotions[e] =
                at_point[t].emotions[e] + emo_signs[e] * r.uniform(0.15, 0.6);
        }

        CheckInstance inst;
        for (const auto& [name, t] : base.named_params())
          inst.points.push_back(*t);
        inst.fn = [base, video](Tape& tape, const std::vector<Tensor>& xs) {
          (void)tape;
          Model scratch = base;
          auto np = scratch.named_params();
          for (std::size_t i = 0; i < np.size(); ++i) *np[i].second = xs[i];
          return loss(forward_taped(scratch, video), video.segments, 0.5);
        };
        return inst;
      },
      "model loss gradient check");
}

// Negative control: tanh with a deliberately wrong derivative, recorded
// through the same tape machinery the real ops use.
double check_injected_fault(Rng& rng) {
  const Tensor point = random_tensor({3}, rng);
  return check_gradients(
      [](Tape& tape, const Tensor& x) {
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
          out[i] = std::tanh(x[i]);
        const std::vector<double> cached = out;
        Tensor y = tape.record(
            x.shape(), std::move(out), {x.node()},
            [cached](const std::vector<double>& g,
                     const std::vector<std::vector<double>*>& pg) {
              for (std::size_t i = 0; i < g.size(); ++i)
                (*pg[0])[i] += g[i] * (1.0 - 0.9 * cached[i] * cached[i]);
            });
        return sum(y);
      },
      point, kGradCheckStep);
}

}  // namespace

std::vector<GradCheckRow> run_gradient_suite(std::uint64_t seed,
                                             bool inject_fault) {
  Rng rng(seed);
  std::vector<std::pair<std::string, std::function<double(Rng&)>>> components =
      {{"dense_tanh", check_dense},
       {"lstm_cell", check_lstm_cell},
       {"tensor_fusion", check_fusion},
       {"rtn_loss",
        [](Rng& r) { return check_model_loss(Variant::kRtn, r); }},
       {"early_fusion_loss",
        [](Rng& r) { return check_model_loss(Variant::kEarlyFusion, r); }}};
  if (inject_fault) components.emplace_back("injected_fault", check_injected_fault);

  std::vector<GradCheckRow> rows;
  for (const auto& [name, fn] : components) {
    GradCheckRow row;
    row.component = name;
    for (std::size_t draw = 0; draw < kGradCheckDraws; ++draw)
      row.worst_rel_err = std::max(row.worst_rel_err, fn(rng));
    row.pass = row.worst_rel_err < kGradCheckTol;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace rtnlab
