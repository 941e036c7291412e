// rtnlab/layers.hpp

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

#ifndef RTNLAB_LAYERS_HPP_
#define RTNLAB_LAYERS_HPP_

#include <vector>

#include "rtnlab/ndtensor.hpp"
#include "rtnlab/rng.hpp"

namespace rtnlab {

enum class Activation { kIdentity, kTanh, kSigmoid, kRelu };

struct DenseParams {
  Tensor weight;  // out x in
  Tensor bias;    // out

  std::size_t in_size() const { return weight.shape()[1]; }
  std::size_t out_size() const { return weight.shape()[0]; }
};

// Weights uniform in (-s, s) with s = 1/sqrt(in), bias zero.
DenseParams make_dense(std::size_t in, std::size_t out, Rng& rng);

// activation(W x + b)
Tensor dense_forward(const Tensor& x, const DenseParams& p, Activation act);

// Standard forget-gate LSTM, no peepholes.
struct LstmParams {
  Tensor w_i, w_f, w_o, w_g;  // hidden x in
  Tensor u_i, u_f, u_o, u_g;  // hidden x hidden
  Tensor b_i, b_f, b_o, b_g;  // hidden

  std::size_t in_size() const { return w_i.shape()[1]; }
  std::size_t hidden_size() const { return w_i.shape()[0]; }
};

// Input/recurrent weights uniform (-1/sqrt(fan_in), 1/sqrt(fan_in)); biases
// zero except the forget gate at 1.0.
LstmParams make_lstm(std::size_t in, std::size_t hidden, Rng& rng);

struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState zero_state(std::size_t hidden);

// i = sigmoid(W_i x + U_i h + b_i), f, o likewise, g = tanh(W_g x + U_g h + b_g)
// c = f*c_prev + i*g, h = o*tanh(c)
LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& p);

// Threads state through the whole sequence; one hidden state per input, in
// order. Empty input list is an error.
std::vector<Tensor> lstm_sequence(const std::vector<Tensor>& inputs,
                                  const LstmParams& p, const LstmState& init);

}  // namespace rtnlab

#endif  // RTNLAB_LAYERS_HPP_
