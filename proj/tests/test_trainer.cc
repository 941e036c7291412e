#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rtnlab/dataio.hpp"
#include "rtnlab/errors.hpp"
#include "rtnlab/models.hpp"
#include "rtnlab/ndtensor.hpp"
#include "rtnlab/trainer.hpp"

using namespace rtnlab;

namespace {

SynthConfig tiny_synth(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_train_videos = 8;
  cfg.n_val_videos = 3;
  cfg.segments_per_video = 4;
  cfg.audio_dim = 3;
  cfg.video_dim = 3;
  cfg.text_dim = 3;
  cfg.seed = seed;
  return cfg;
}

ModelConfig tiny_model(Variant v, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.modality_input_dims = {{"audio", 3}, {"video", 3}, {"text", 3}};
  cfg.modality_embed_dims = {{"audio", 2}, {"video", 2}, {"text", 2}};
  cfg.lstm_hidden = 4;
  cfg.head_hidden = 4;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("loss hand case") {
  TapedPrediction p1{Tensor::vec({1.0}),
                     Tensor::vec({0.0, 0.0, 0.0, 1.0, 0.0, 0.0})};
  TapedPrediction p2{Tensor::vec({-2.0}),
                     Tensor::vec({0.5, 0.0, 0.0, 0.0, 0.0, 0.0})};
  SegmentRecord g1, g2;
  g1.sentiment = 2.0;   // |err| = 1
  g2.sentiment = -1.0;  // |err| = 1
  g1.emotions = {0, 0, 0, 2.0, 0, 0};   // one coord off by 1
  g2.emotions = {0.5, 0, 0, 0, 0, 0};   // exact

  const double sent_term = (1.0 + 1.0) / 2.0;
  const double emo_term = 1.0 / 12.0;  // 12 emotion coordinates total
  const Tensor l = loss({p1, p2}, {g1, g2}, 0.5);
  CHECK(l.item() == doctest::Approx(sent_term + 0.5 * emo_term).epsilon(1e-12));

  const Tensor l0 = loss({p1, p2}, {g1, g2}, 0.0);
  CHECK(l0.item() == doctest::Approx(sent_term).epsilon(1e-12));

  CHECK_THROWS_AS(loss({p1}, {g1, g2}, 0.5), ArgumentError);
  CHECK_THROWS_AS(loss({}, {}, 0.5), ArgumentError);
}

TEST_CASE("loss is differentiable with the expected sign gradients") {
  Tape tape;
  TapedPrediction p{tape.leaf(Tensor::vec({1.0})),
                    tape.leaf(Tensor::vec({0.0, 0.0, 0.0, 0.0, 0.0, 0.0}))};
  SegmentRecord g;
  g.sentiment = 3.0;                // prediction below gold -> d/dp = -1
  g.emotions = {1, 1, 1, 1, 1, 1};  // all below; the emotion term averages
                                    // the 6 coordinates, so each d/dp = -w/6
  const Tensor l = loss({p}, {g}, 0.6);
  tape.backward(l);
  CHECK(tape.grad(p.sentiment).values() == std::vector<double>{-1.0});
  const Tensor emo_grad = tape.grad(p.emotions);
  for (double gv : emo_grad.values())
    CHECK(gv == doctest::Approx(-0.6 / 6.0).epsilon(1e-12));
}

TEST_CASE("adam_step matches the hand-derived first update") {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  Tensor p = Tensor::vec({1.0, -2.0});
  AdamState state;
  const std::vector<std::vector<double>> grads = {{0.5, -1.5}};
  adam_step({&p}, grads, state, cfg);

  // After one bias-corrected step the update is lr * g / (|g| + eps).
  CHECK(p[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + cfg.epsilon))
                    .epsilon(1e-9));
  CHECK(p[1] == doctest::Approx(-2.0 + 0.1 * 1.5 / (1.5 + cfg.epsilon))
                    .epsilon(1e-9));
  CHECK(state.step == 1);

  // Second step follows the moment recursions.
  const double g = 0.5;
  adam_step({&p}, grads, state, cfg);
  const double m2 = 0.9 * (0.1 * g) + 0.1 * g;
  const double v2 = 0.999 * (0.001 * g * g) + 0.001 * g * g;
  const double mh = m2 / (1 - std::pow(0.9, 2));
  const double vh = v2 / (1 - std::pow(0.999, 2));
  const double want =
      1.0 - 0.1 * g / (g + cfg.epsilon) - 0.1 * mh / (std::sqrt(vh) + cfg.epsilon);
  CHECK(p[0] == doctest::Approx(want).epsilon(1e-9));

  CHECK_THROWS_AS(adam_step({&p}, {}, state, cfg), ArgumentError);
}

TEST_CASE("early stopper waits out the patience window") {
  EarlyStopper stop(2);
  CHECK_FALSE(stop.observe(0, 5.0));  // best
  CHECK_FALSE(stop.observe(1, 4.0));  // improves
  CHECK_FALSE(stop.observe(2, 4.0));  // wait 1
  CHECK_FALSE(stop.observe(3, 4.5));  // wait 2
  CHECK(stop.observe(4, 4.2));        // wait 3 > patience
  CHECK(stop.best_epoch() == 1);
  CHECK(stop.best_value() == 4.0);
}

TEST_CASE("train is deterministic and patience-zero stops early") {
  const auto [train_videos, val_videos] = gen_synthetic(tiny_synth(3));
  const Model init = build_model(tiny_model(Variant::kEarlyFusion, 4));

  TrainConfig cfg;
  cfg.max_epochs = 4;
  cfg.patience = 4;
  cfg.seed = 9;

  const auto [m1, log1] = train(init, train_videos, val_videos, cfg);
  const auto [m2, log2] = train(init, train_videos, val_videos, cfg);

  REQUIRE(log1.train_loss.size() == 4);
  REQUIRE(log1.val_mae.size() == 4);
  CHECK(log1.train_loss == log2.train_loss);
  CHECK(log1.val_mae == log2.val_mae);
  CHECK(log1.best_epoch == log2.best_epoch);
  CHECK(log1.stop_reason == "max_epochs");

  const auto p1 = m1.named_params();
  const auto p2 = m2.named_params();
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK(p1[i].second->values() == p2[i].second->values());

  // A small patience window can cut training short of the epoch budget.
  TrainConfig impatient = cfg;
  impatient.max_epochs = 50;
  impatient.patience = 1;
  const auto [m3, log3] = train(init, train_videos, val_videos, impatient);
  if (log3.stop_reason == "early_stop") {
    CHECK(log3.val_mae.size() < 50);
  }
  CHECK(log3.best_epoch < log3.val_mae.size());
}

TEST_CASE("zero learning rate freezes the parameters") {
  const auto [train_videos, val_videos] = gen_synthetic(tiny_synth(6));
  const Model init = build_model(tiny_model(Variant::kTfn, 2));
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto [trained, log] = train(init, train_videos, val_videos, cfg);
  const auto a = init.named_params();
  const auto b = trained.named_params();
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i].second->values() == b[i].second->values());
}

TEST_CASE("training reduces validation error on the planted signal") {
  SynthConfig scfg = tiny_synth(11);
  scfg.n_train_videos = 20;
  scfg.n_val_videos = 5;
  const auto [train_videos, val_videos] = gen_synthetic(scfg);
  const Model init = build_model(tiny_model(Variant::kRtn, 8));

  TrainConfig cfg;
  cfg.max_epochs = 8;
  cfg.patience = 8;
  cfg.seed = 1;
  const auto [trained, log] = train(init, train_videos, val_videos, cfg);
  const double best = *std::min_element(log.val_mae.begin(), log.val_mae.end());
  CHECK(best < log.val_mae.front());
}

TEST_CASE("majority baseline accuracy") {
  // Train sentiment signs: 3 positive videos vs 1 negative -> majority is
  // positive; eval has 1 positive of 2 segments.
  Dataset train_videos, eval_videos;
  for (int v = 0; v < 4; ++v) {
    VideoSequence video{"t" + std::to_string(v), {}};
    SegmentRecord seg;
    seg.video_id = video.video_id;
    seg.segment_index = 0;
    seg.sentiment = v < 3 ? 1.0 : -1.0;
    video.segments.push_back(seg);
    train_videos.push_back(video);
  }
  VideoSequence ev{"e0", {}};
  for (int s = 0; s < 2; ++s) {
    SegmentRecord seg;
    seg.video_id = "e0";
    seg.segment_index = std::size_t(s);
    seg.sentiment = s == 0 ? 2.0 : -2.0;
    ev.segments.push_back(seg);
  }
  eval_videos.push_back(ev);
  CHECK(majority_binary_accuracy(train_videos, eval_videos) == 0.5);
}

TEST_CASE("train log serializes") {
  TrainLog log;
  log.train_loss = {1.0, 0.5};
  log.val_mae = {0.9, 0.7};
  log.best_epoch = 1;
  log.stop_reason = "max_epochs";
  const auto j = train_log_to_json(log);
  CHECK(j["best_epoch"] == 1);
  CHECK(j["val_mae"].size() == 2);
  CHECK(j["stop_reason"] == "max_epochs");
}

TEST_CASE("gradient suite passes and flags an injected fault") {
  const auto rows = run_gradient_suite(7);
  REQUIRE(rows.size() >= 5);
  for (const auto& row : rows) {
    CAPTURE(row.component);
    CHECK(row.pass);
    CHECK(row.worst_rel_err < kGradCheckTol);
  }

  const auto faulty = run_gradient_suite(7, /*inject_fault=*/true);
  bool flagged = false;
  for (const auto& row : faulty) {
    if (!row.pass) flagged = true;
  }
  CHECK(flagged);
}

}  // TEST_SUITE
