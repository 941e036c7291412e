// core/src/layers.cc

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

#include "rtnlab/layers.hpp"

#include <cmath>

#include "rtnlab/errors.hpp"

namespace rtnlab {

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng& rng) {
  std::size_t n = shape_numel(shape);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = rng.uniform(-bound, bound);
  return Tensor(std::move(shape), std::move(values));
}

Tensor apply_activation(const Tensor& t, Activation act) {
  switch (act) {
    case Activation::kIdentity:
      return t;
    case Activation::kTanh:
      return tanh(t);
    case Activation::kSigmoid:
      return sigmoid(t);
    case Activation::kRelu:
      return relu(t);
  }
  throw ArgumentError("unknown activation");
}

}  // namespace

DenseParams make_dense(std::size_t in, std::size_t out, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(in));
  DenseParams p;
  p.weight = uniform_tensor({out, in}, s, rng);
  p.bias = Tensor::zeros({out});
  return p;
}

Tensor dense_forward(const Tensor& x, const DenseParams& p, Activation act) {
  if (x.rank() != 1 || x.size() != p.in_size())
    throw DimensionError("dense_forward: input " + shape_str(x.shape()) +
                         " vs weight " + shape_str(p.weight.shape()));
  return apply_activation(add(matvec(p.weight, x), p.bias), act);
}

LstmParams make_lstm(std::size_t in, std::size_t hidden, Rng& rng) {
  const double s_in = 1.0 / std::sqrt(static_cast<double>(in));
  const double s_h = 1.0 / std::sqrt(static_cast<double>(hidden));
  LstmParams p;
  p.w_i = uniform_tensor({hidden, in}, s_in, rng);
  p.w_f = uniform_tensor({hidden, in}, s_in, rng);
  p.w_o = uniform_tensor({hidden, in}, s_in, rng);
  p.w_g = uniform_tensor({hidden, in}, s_in, rng);
  p.u_i = uniform_tensor({hidden, hidden}, s_h, rng);
  p.u_f = uniform_tensor({hidden, hidden}, s_h, rng);
  p.u_o = uniform_tensor({hidden, hidden}, s_h, rng);
  p.u_g = uniform_tensor({hidden, hidden}, s_h, rng);
  p.b_i = Tensor::zeros({hidden});
  p.b_f = Tensor::full({hidden}, 1.0);  // keeps early cell state flowing
  p.b_o = Tensor::zeros({hidden});
  p.b_g = Tensor::zeros({hidden});
  return p;
}

LstmState zero_state(std::size_t hidden) {
  return {Tensor::zeros({hidden}), Tensor::zeros({hidden})};
}

LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& p) {
  const std::size_t hidden = p.hidden_size();
  if (x.rank() != 1 || x.size() != p.in_size())
    throw DimensionError("lstm_cell: input " + shape_str(x.shape()) +
                         " vs weight " + shape_str(p.w_i.shape()));
  if (prev.h.size() != hidden || prev.c.size() != hidden)
    throw DimensionError("lstm_cell: state " + shape_str(prev.h.shape()) + "/" +
                         shape_str(prev.c.shape()) + " vs hidden size " +
                         std::to_string(hidden));

  auto gate_pre = [&](const Tensor& w, const Tensor& u, const Tensor& b) {
    return add(add(matvec(w, x), matvec(u, prev.h)), b);
  };
  Tensor i = sigmoid(gate_pre(p.w_i, p.u_i, p.b_i));
  Tensor f = sigmoid(gate_pre(p.w_f, p.u_f, p.b_f));
  Tensor o = sigmoid(gate_pre(p.w_o, p.u_o, p.b_o));
  Tensor g = tanh(gate_pre(p.w_g, p.u_g, p.b_g));

  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor h = mul(o, tanh(c));
  return {h, c};
}

std::vector<Tensor> lstm_sequence(const std::vector<Tensor>& inputs,
                                  const LstmParams& p, const LstmState& init) {
  if (inputs.empty()) throw ArgumentError("lstm_sequence: empty input list");
  std::vector<Tensor> outputs;
  outputs.reserve(inputs.size());
  LstmState state = init;
  for (const Tensor& x : inputs) {
    state = lstm_cell(x, state, p);
    outputs.push_back(state.h);
  }
  return outputs;
}

}  // namespace rtnlab
