#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rtnlab/dataio.hpp"
#include "rtnlab/errors.hpp"
#include "rtnlab/evalmetrics.hpp"
#include "rtnlab/models.hpp"
#include "rtnlab/rng.hpp"

using namespace rtnlab;

namespace {

// Independent confusion-matrix counters.
std::pair<double, double> brute_binary(const std::vector<bool>& pred,
                                       const std::vector<bool>& gold) {
  double tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i]) correct += 1;
    if (pred[i] && gold[i]) tp += 1;
    if (pred[i] && !gold[i]) fp += 1;
    if (!pred[i] && gold[i]) fn += 1;
  }
  const double acc = pred.empty() ? 0.0 : correct / double(pred.size());
  const double denom_p = tp + fp, denom_r = tp + fn;
  const double prec = denom_p > 0 ? tp / denom_p : 0.0;
  const double rec = denom_r > 0 ? tp / denom_r : 0.0;
  const double f1 = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  return {acc, f1};
}

std::pair<double, double> brute_multiclass(const std::vector<int>& pred,
                                           const std::vector<int>& gold) {
  double correct = 0;
  std::array<double, 7> tp{}, fp{}, fn{}, support{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == gold[i]) correct += 1;
    support[gold[i]] += 1;
    if (pred[i] == gold[i]) tp[pred[i]] += 1;
    else {
      fp[pred[i]] += 1;
      fn[gold[i]] += 1;
    }
  }
  double weighted = 0, total = 0;
  for (int c = 0; c < 7; ++c) {
    const double denom_p = tp[c] + fp[c], denom_r = tp[c] + fn[c];
    const double prec = denom_p > 0 ? tp[c] / denom_p : 0.0;
    const double rec = denom_r > 0 ? tp[c] / denom_r : 0.0;
    const double f1 = (prec + rec) > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    weighted += support[c] * f1;
    total += support[c];
  }
  return {pred.empty() ? 0.0 : correct / double(pred.size()),
          total > 0 ? weighted / total : 0.0};
}

}  // namespace

TEST_SUITE("evalmetrics") {

TEST_CASE("binary metrics hand cases") {
  const auto [acc, f1] = binary_metrics({true, true, false, false},
                                        {true, false, true, false});
  CHECK(acc == 0.5);
  CHECK(f1 == 0.5);  // precision = recall = 0.5

  // All-negative predictions and gold: accuracy 1, F1 resolves to 0.
  const auto [acc0, f10] = binary_metrics({false, false}, {false, false});
  CHECK(acc0 == 1.0);
  CHECK(f10 == 0.0);

  CHECK_THROWS_AS(binary_metrics({true}, {true, false}), ArgumentError);
}

TEST_CASE("multiclass metrics hand case and range checks") {
  const auto [acc, f1w] =
      multiclass_metrics({0, 1, 2, 2}, {0, 1, 1, 2});
  CHECK(acc == 0.75);
  // class 0: F1 1 (support 1); class 1: P 1, R 0.5 -> F1 2/3 (support 2);
  // class 2: P 0.5, R 1 -> F1 2/3 (support 1).
  CHECK(f1w == doctest::Approx((1.0 + 2 * (2.0 / 3) + 2.0 / 3) / 4)
                   .epsilon(1e-12));

  CHECK_THROWS_AS(multiclass_metrics({7}, {0}), ArgumentError);
  CHECK_THROWS_AS(multiclass_metrics({0}, {-1}), ArgumentError);
}

TEST_CASE("metrics match brute-force counters on random instances") {
  Rng rng(321);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<bool> bp(n), bg(n);
    std::vector<int> mp(n), mg(n);
    for (std::size_t i = 0; i < n; ++i) {
      bp[i] = rng.below(2) == 1;
      bg[i] = rng.below(2) == 1;
      mp[i] = int(rng.below(7));
      mg[i] = int(rng.below(7));
    }
    const auto got_b = binary_metrics(bp, bg);
    const auto want_b = brute_binary(bp, bg);
    CHECK(got_b.first == doctest::Approx(want_b.first).epsilon(1e-12));
    CHECK(got_b.second == doctest::Approx(want_b.second).epsilon(1e-12));

    const auto got_m = multiclass_metrics(mp, mg);
    const auto want_m = brute_multiclass(mp, mg);
    CHECK(got_m.first == doctest::Approx(want_m.first).epsilon(1e-12));
    CHECK(got_m.second == doctest::Approx(want_m.second).epsilon(1e-12));
  }
}

TEST_CASE("mae definition and exact shift invariance") {
  CHECK(mae({1.0, 2.0, 3.0}, {1.5, 2.0, 1.0}) ==
        doctest::Approx((0.5 + 0.0 + 2.0) / 3).epsilon(1e-15));

  // Dyadic values keep the shifted sums exact in binary floating point.
  const std::vector<double> pred = {0.25, -1.5, 2.75, 0.0};
  const std::vector<double> gold = {1.0, -0.25, 2.5, -0.75};
  for (double shift : {0.5, -2.0, 1024.0}) {
    std::vector<double> ps = pred, gs = gold;
    for (double& v : ps) v += shift;
    for (double& v : gs) v += shift;
    CHECK(mae(ps, gs) == mae(pred, gold));
  }

  CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), ArgumentError);
}

TEST_CASE("evaluate_model agrees with manual per-segment metrics") {
  SynthConfig scfg;
  scfg.n_train_videos = 4;
  scfg.n_val_videos = 2;
  scfg.segments_per_video = 3;
  scfg.audio_dim = 3;
  scfg.video_dim = 3;
  scfg.text_dim = 3;
  scfg.seed = 5;
  const Dataset data = gen_synthetic(scfg).first;

  ModelConfig mcfg;
  mcfg.variant = Variant::kTfn;
  mcfg.modality_input_dims = {{"audio", 3}, {"video", 3}, {"text", 3}};
  mcfg.modality_embed_dims = {{"audio", 2}, {"video", 2}, {"text", 2}};
  mcfg.head_hidden = 4;
  mcfg.seed = 1;
  const Model model = build_model(mcfg);

  const MetricsReport report = evaluate_model(model, data);

  std::vector<bool> pred_b, gold_b;
  std::vector<int> pred_7, gold_7;
  std::vector<double> pred_y, gold_y;
  for (const auto& video : data) {
    const auto preds = forward(model, video);
    for (std::size_t t = 0; t < preds.size(); ++t) {
      const auto [pb, p7] = discretize_sentiment(preds[t].sentiment);
      const auto [gb, g7] = discretize_sentiment(video.segments[t].sentiment);
      pred_b.push_back(pb);
      gold_b.push_back(gb);
      pred_7.push_back(p7);
      gold_7.push_back(g7);
      pred_y.push_back(preds[t].sentiment);
      gold_y.push_back(video.segments[t].sentiment);
    }
  }
  const auto [acc, f1] = binary_metrics(pred_b, gold_b);
  const auto [acc7, f17] = multiclass_metrics(pred_7, gold_7);
  CHECK(report.binary_acc == doctest::Approx(acc).epsilon(1e-12));
  CHECK(report.binary_f1 == doctest::Approx(f1).epsilon(1e-12));
  CHECK(report.acc7 == doctest::Approx(acc7).epsilon(1e-12));
  CHECK(report.f1_7_weighted == doctest::Approx(f17).epsilon(1e-12));
  CHECK(report.sentiment_mae ==
        doctest::Approx(mae(pred_y, gold_y)).epsilon(1e-12));
}

TEST_CASE("report json round-trip and table rendering") {
  MetricsReport r;
  r.binary_acc = 0.875;
  r.binary_f1 = 0.8;
  r.acc7 = 0.5;
  r.f1_7_weighted = 0.45;
  r.sentiment_mae = 0.61;
  r.emotion_mae = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};

  const MetricsReport back = report_from_json(report_to_json(r));
  CHECK(back.binary_acc == r.binary_acc);
  CHECK(back.binary_f1 == r.binary_f1);
  CHECK(back.acc7 == r.acc7);
  CHECK(back.f1_7_weighted == r.f1_7_weighted);
  CHECK(back.sentiment_mae == r.sentiment_mae);
  CHECK(back.emotion_mae == r.emotion_mae);

  const std::string table = report_table(r);
  CHECK(table.find("0.875") != std::string::npos);
  CHECK(table.find("happy") != std::string::npos);
}

}  // TEST_SUITE
