#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "rtnlab/dataio.hpp"
#include "rtnlab/errors.hpp"
#include "rtnlab/models.hpp"
#include "test_util.hpp"

using namespace rtnlab;

namespace {

ModelConfig tiny_config(Variant v) {
  ModelConfig cfg;
  cfg.variant = v;
  cfg.modality_input_dims = {{"audio", 3}, {"video", 2}, {"text", 4}};
  cfg.modality_embed_dims = {{"audio", 2}, {"video", 2}, {"text", 2}};
  cfg.lstm_hidden = 4;
  cfg.head_hidden = 3;
  cfg.seed = 99;
  return cfg;
}

VideoSequence tiny_video(std::size_t segments) {
  VideoSequence video{"v0", {}};
  for (std::size_t t = 0; t < segments; ++t) {
    SegmentRecord seg;
    seg.video_id = "v0";
    seg.segment_index = t;
    seg.audio = {0.1 * double(t + 1), -0.2, 0.3};
    seg.video = {0.5, -0.1 * double(t)};
    seg.text = {0.2, 0.4, -0.6, 0.1 * double(t)};
    seg.sentiment = (t % 2 == 0) ? 1.0 : -1.0;
    video.segments.push_back(seg);
  }
  return video;
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("variant names round-trip") {
  for (Variant v : {Variant::kUniAudio, Variant::kUniVideo, Variant::kUniText,
                    Variant::kEarlyFusion, Variant::kTfn, Variant::kRtn}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  CHECK_THROWS_AS(parse_variant("nope"), ConfigError);
}

TEST_CASE("required modalities per variant") {
  CHECK(required_modalities(Variant::kUniAudio) ==
        std::vector<std::string>{"audio"});
  CHECK(required_modalities(Variant::kUniText) ==
        std::vector<std::string>{"text"});
  CHECK(required_modalities(Variant::kRtn) ==
        std::vector<std::string>{"audio", "video", "text"});
}

TEST_CASE("segment_feature_dim per variant") {
  CHECK(segment_feature_dim(tiny_config(Variant::kUniAudio)) == 2);
  CHECK(segment_feature_dim(tiny_config(Variant::kEarlyFusion)) == 6);
  CHECK(segment_feature_dim(tiny_config(Variant::kTfn)) == 27);
  CHECK(segment_feature_dim(tiny_config(Variant::kRtn)) == 27);
}

TEST_CASE("build_model structure") {
  const Model rtn = build_model(tiny_config(Variant::kRtn));
  CHECK(rtn.encoders.size() == 3);
  CHECK(rtn.has_lstm);

  const Model tfn = build_model(tiny_config(Variant::kTfn));
  CHECK_FALSE(tfn.has_lstm);

  const Model uni = build_model(tiny_config(Variant::kUniVideo));
  CHECK(uni.encoders.size() == 1);
  CHECK(uni.encoders.count("video") == 1);
  CHECK(uni.has_lstm);

  CHECK(rtn.param_count() > tfn.param_count());

  // Same seed, same parameters; the listing order is stable.
  const Model again = build_model(tiny_config(Variant::kRtn));
  const auto a = rtn.named_params();
  const auto b = again.named_params();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second->values() == b[i].second->values());
  }
}

TEST_CASE("invalid configs are config errors") {
  ModelConfig cfg = tiny_config(Variant::kRtn);
  cfg.modality_input_dims.erase("text");
  CHECK_THROWS_AS(build_model(cfg), ConfigError);

  ModelConfig cfg2 = tiny_config(Variant::kRtn);
  cfg2.modality_embed_dims["video"] = 0;
  CHECK_THROWS_AS(build_model(cfg2), ConfigError);
}

TEST_CASE("forward output shape and determinism") {
  for (Variant v : {Variant::kUniAudio, Variant::kEarlyFusion, Variant::kTfn,
                    Variant::kRtn}) {
    const Model m = build_model(tiny_config(v));
    const VideoSequence video = tiny_video(5);
    const auto preds = forward(m, video);
    REQUIRE(preds.size() == 5);
    const auto preds2 = forward(m, video);
    for (std::size_t t = 0; t < preds.size(); ++t) {
      CHECK(preds[t].sentiment == preds2[t].sentiment);
      CHECK(std::isfinite(preds[t].sentiment));
      for (double e : preds[t].emotions) CHECK(std::isfinite(e));
    }
  }
}

TEST_CASE("forward_taped matches forward values") {
  const Model m = build_model(tiny_config(Variant::kRtn));
  const VideoSequence video = tiny_video(3);
  const auto plain = forward(m, video);
  const auto taped = forward_taped(m, video);
  REQUIRE(taped.size() == plain.size());
  for (std::size_t t = 0; t < plain.size(); ++t) {
    CHECK(taped[t].sentiment.item() ==
          doctest::Approx(plain[t].sentiment).epsilon(1e-15));
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      CHECK(taped[t].emotions[e] ==
            doctest::Approx(plain[t].emotions[e]).epsilon(1e-15));
    }
  }
}

TEST_CASE("missing modality in a segment is a data error") {
  const Model m = build_model(tiny_config(Variant::kRtn));
  VideoSequence video = tiny_video(2);
  video.segments[1].video.clear();
  CHECK_THROWS_WITH_AS(forward(m, video), doctest::Contains("segment"),
                       DataError);
}

TEST_CASE("discretize_sentiment bins") {
  // pos iff y > 0; class = clamp(round half away from zero, -3, 3) + 3.
  CHECK(discretize_sentiment(0.0) == std::pair<bool, int>{false, 3});
  CHECK(discretize_sentiment(0.4) == std::pair<bool, int>{true, 3});
  CHECK(discretize_sentiment(0.5) == std::pair<bool, int>{true, 4});
  CHECK(discretize_sentiment(-0.5) == std::pair<bool, int>{false, 2});
  CHECK(discretize_sentiment(1.49) == std::pair<bool, int>{true, 4});
  CHECK(discretize_sentiment(2.5) == std::pair<bool, int>{true, 6});
  CHECK(discretize_sentiment(3.4) == std::pair<bool, int>{true, 6});
  CHECK(discretize_sentiment(-3.4) == std::pair<bool, int>{false, 0});
  CHECK(discretize_sentiment(-2.5) == std::pair<bool, int>{false, 0});
}

TEST_CASE("checkpoint round-trip is exact") {
  testutil::TempDir tmp;
  const Model m = build_model(tiny_config(Variant::kEarlyFusion));
  const std::string path = tmp.file("model.ckpt.json");
  save_checkpoint(m, path);
  const Model back = load_checkpoint(path);

  CHECK(back.config.variant == m.config.variant);
  CHECK(back.config.lstm_hidden == m.config.lstm_hidden);
  const auto a = m.named_params();
  const auto b = back.named_params();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].first == b[i].first);
    CHECK(a[i].second->values() == b[i].second->values());
  }

  // Loaded models predict identically.
  const VideoSequence video = tiny_video(3);
  const auto p1 = forward(m, video);
  const auto p2 = forward(back, video);
  for (std::size_t t = 0; t < p1.size(); ++t)
    CHECK(p1[t].sentiment == p2[t].sentiment);
}

TEST_CASE("corrupt checkpoints are checkpoint errors") {
  testutil::TempDir tmp;
  CHECK_THROWS_AS(load_checkpoint(tmp.file("missing.json")), CheckpointError);

  const std::string bad = tmp.file("bad.json");
  testutil::write_file(bad, "{ not json");
  CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);

  const std::string wrong = tmp.file("wrong.json");
  testutil::write_file(wrong, "{\"version\":\"other-9\"}");
  CHECK_THROWS_WITH_AS(load_checkpoint(wrong), doctest::Contains("other-9"),
                       CheckpointError);
}

}  // TEST_SUITE
