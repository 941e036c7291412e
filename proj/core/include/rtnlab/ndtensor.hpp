// rtnlab/ndtensor.hpp

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

#ifndef RTNLAB_NDTENSOR_HPP_
#define RTNLAB_NDTENSOR_HPP_

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace rtnlab {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);  // e.g. "2x3"

// Row-major linearization. multi_index inverts flat_index for any in-range
// flat offset.
std::size_t flat_index(const Shape& shape, const std::vector<std::size_t>& idx);
std::vector<std::size_t> multi_index(const Shape& shape, std::size_t flat);

class Tape;

// Dense n-dimensional array of 64-bit reals in row-major order. A Tensor is
// a plain value unless it was produced through a Tape, in which case it also
// carries a handle to its tape node so gradients can flow back to it.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor vec(std::vector<double> values);  // rank-1

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double at(const std::vector<std::size_t>& idx) const;

  // Value of a one-element tensor.
  double item() const;

  bool on_tape() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }
  // Strips the tape handle, keeping the value.
  Tensor detached() const { return Tensor(shape_, values_); }

 private:
  friend class Tape;
  Shape shape_;
  std::vector<double> values_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

// Reverse-mode differentiation tape. Nodes are recorded in topological order
// during the forward pass, each carrying the closure that pushes its output
// gradient into its parents. Cached primal values live inside the closures.
//
// A tape and the tensors recorded on it belong to a single forward/backward
// pass on one thread; separate tapes are independent.
class Tape {
 public:
  using BackwardFn =
      std::function<void(const std::vector<double>& out_grad,
                         const std::vector<std::vector<double>*>& parent_grads)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Records `value` as a differentiable leaf and returns the attached tensor.
  Tensor leaf(const Tensor& value);

  // Records one primitive operation. `parents` are node ids on this tape and
  // must precede the new node.
  Tensor record(Shape out_shape, std::vector<double> out_values,
                std::vector<int> parents, BackwardFn backward);

  // Seeds d(root)/d(root) = 1 and sweeps the tape in reverse. `root` must be
  // a one-element tensor recorded on this tape. Grads are zeroed first, so
  // repeated calls do not accumulate.
  void backward(const Tensor& root);

  // Gradient of the last backward() root w.r.t. `t`, shaped like `t`.
  Tensor grad(const Tensor& t) const;

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Shape shape;
    std::vector<double> grad;
    std::vector<int> parents;
    BackwardFn backward;  // empty for leaves
  };
  std::vector<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Differentiable primitives. Each works on plain tensors too; when an input
// is on a tape the result is recorded there. Mixing two different tapes in
// one call is an error.
// ---------------------------------------------------------------------------

// (m,k) x (k,n) -> (m,n)
Tensor matmul(const Tensor& a, const Tensor& b);
// (m,n) x (n) -> (m)
Tensor matvec(const Tensor& w, const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// Elementwise (Hadamard) product.
Tensor mul(const Tensor& a, const Tensor& b);

enum class Unary { kTanh, kSigmoid, kRelu, kAddConst, kScale };

// kAddConst and kScale use `c`; the others ignore it.
Tensor elementwise(const Tensor& t, Unary f, double c = 0.0);

Tensor tanh(const Tensor& t);
Tensor sigmoid(const Tensor& t);
Tensor relu(const Tensor& t);
Tensor add_const(const Tensor& t, double c);
Tensor scale(const Tensor& t, double c);
Tensor abs(const Tensor& t);

// Rank-1 concatenation in the given order. Gradient slices back per part.
Tensor concat(const std::vector<Tensor>& parts);

// Sum of all elements -> scalar.
Tensor sum(const Tensor& t);
// Mean of all elements -> scalar.
Tensor mean(const Tensor& t);

// Value-level slice of a rank-1 tensor; not differentiable.
Tensor slice1(const Tensor& t, std::size_t offset, std::size_t len);

// ---------------------------------------------------------------------------
// Gradient verification. fn builds a scalar on the provided tape from the
// leaf it is given; the checker compares the tape gradient against central
// differences and returns the max relative error
//   |analytic - numeric| / max(1e-12, |analytic| + |numeric|).
// ---------------------------------------------------------------------------

using ScalarFn = std::function<Tensor(Tape&, const Tensor&)>;
using ScalarFnMulti = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

double check_gradients(const ScalarFn& fn, const Tensor& point, double step);
double check_gradients(const ScalarFnMulti& fn, const std::vector<Tensor>& points,
                       double step);

}  // namespace rtnlab

#endif  // RTNLAB_NDTENSOR_HPP_
