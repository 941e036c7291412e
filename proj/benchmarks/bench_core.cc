// benchmarks/bench_core.cc

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

#include <benchmark/benchmark.h>

#include <vector>

#include "rtnlab/fusion.hpp"
#include "rtnlab/layers.hpp"
#include "rtnlab/models.hpp"
#include "rtnlab/ndtensor.hpp"
#include "rtnlab/rng.hpp"

namespace {

using namespace rtnlab;

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void BM_TensorFuseForward(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = Tensor::vec(random_values(d, rng));
  const Tensor b = Tensor::vec(random_values(d, rng));
  const Tensor c = Tensor::vec(random_values(d, rng));
  for (auto _ : state) {
    FusedVector fused = tensor_fuse({a, b, c});
    benchmark::DoNotOptimize(fused.values.values().data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>((d + 1) * (d + 1) * (d + 1)));
}

void BM_TensorFuseBackward(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const std::vector<double> va = random_values(d, rng);
  const std::vector<double> vb = random_values(d, rng);
  const std::vector<double> vc = random_values(d, rng);
  for (auto _ : state) {
    Tape tape;
    const Tensor a = tape.leaf(Tensor::vec(va));
    const Tensor b = tape.leaf(Tensor::vec(vb));
    const Tensor c = tape.leaf(Tensor::vec(vc));
    const FusedVector fused = tensor_fuse({a, b, c});
    const Tensor total = sum(fused.values);
    tape.backward(total);
    benchmark::DoNotOptimize(tape.grad(a).values().data());
  }
}

void BM_LstmCell(benchmark::State& state) {
  const std::size_t hidden = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const LstmParams params = make_lstm(hidden, hidden, rng);
  const Tensor x = Tensor::vec(random_values(hidden, rng));
  for (auto _ : state) {
    Tape tape;
    LstmParams p = params;  // detached copy; forward only
    LstmState s = zero_state(hidden);
    const LstmState next = lstm_cell(x, s, p);
    benchmark::DoNotOptimize(next.h.values().data());
  }
}

void BM_RtnVideoForward(benchmark::State& state) {
  const std::size_t segments = static_cast<std::size_t>(state.range(0));
  ModelConfig cfg;
  cfg.variant = Variant::kRtn;
  cfg.modality_input_dims = {{"audio", 8}, {"video", 8}, {"text", 8}};
  cfg.modality_embed_dims = {{"audio", 4}, {"video", 4}, {"text", 4}};
  cfg.lstm_hidden = 32;
  cfg.head_hidden = 32;
  cfg.seed = 3;
  const Model model = build_model(cfg);

  Rng rng(4);
  VideoSequence video;
  video.video_id = "bench";
  for (std::size_t t = 0; t < segments; ++t) {
    SegmentRecord rec;
    rec.video_id = "bench";
    rec.segment_index = t;
    rec.audio = random_values(8, rng);
    rec.video = random_values(8, rng);
    rec.text = random_values(8, rng);
    rec.sentiment = 0.0;
    rec.emotions.fill(0.0);
    video.segments.push_back(rec);
  }
  for (auto _ : state) {
    const auto preds = forward(model, video);
    benchmark::DoNotOptimize(preds.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(segments));
}

BENCHMARK(BM_TensorFuseForward)->Arg(4)->Arg(8)->Arg(16);
BENCHMARK(BM_TensorFuseBackward)->Arg(4)->Arg(8)->Arg(16);
BENCHMARK(BM_LstmCell)->Arg(16)->Arg(32)->Arg(64);
BENCHMARK(BM_RtnVideoForward)->Arg(5)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
