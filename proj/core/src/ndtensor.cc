// core/src/ndtensor.cc

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

#include "rtnlab/ndtensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rtnlab/errors.hpp"

namespace rtnlab {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::ostringstream os;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  return os.str();
}

std::size_t flat_index(const Shape& shape, const std::vector<std::size_t>& idx) {
  if (idx.size() != shape.size())
    throw ArgumentError("flat_index: rank mismatch, shape " + shape_str(shape) +
                        " vs " + std::to_string(idx.size()) + " indices");
  std::size_t flat = 0;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (idx[i] >= shape[i])
      throw ArgumentError("flat_index: index " + std::to_string(idx[i]) +
                          " out of range for extent " + std::to_string(shape[i]));
    flat = flat * shape[i] + idx[i];
  }
  return flat;
}

std::vector<std::size_t> multi_index(const Shape& shape, std::size_t flat) {
  std::vector<std::size_t> idx(shape.size());
  for (std::size_t i = shape.size(); i-- > 0;) {
    idx[i] = flat % shape[i];
    flat /= shape[i];
  }
  if (flat != 0)
    throw ArgumentError("multi_index: flat offset out of range for shape " +
                        shape_str(shape));
  return idx;
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_numel(shape_) != values_.size())
    throw DimensionError("tensor: shape " + shape_str(shape_) + " needs " +
                         std::to_string(shape_numel(shape_)) + " values, got " +
                         std::to_string(values_.size()));
}

Tensor Tensor::zeros(Shape shape) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::full(Shape shape, double value) {
  std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, {value}); }

Tensor Tensor::vec(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

double Tensor::at(const std::vector<std::size_t>& idx) const {
  return values_[flat_index(shape_, idx)];
}

double Tensor::item() const {
  if (values_.size() != 1)
    throw ArgumentError("item: tensor of shape " + shape_str(shape_) +
                        " is not a scalar");
  return values_[0];
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tensor Tape::leaf(const Tensor& value) {
  Node node;
  node.shape = value.shape();
  node.grad.assign(value.size(), 0.0);
  nodes_.push_back(std::move(node));
  Tensor out(value.shape(), value.values());
  out.tape_ = this;
  out.node_ = static_cast<int>(nodes_.size()) - 1;
  return out;
}

Tensor Tape::record(Shape out_shape, std::vector<double> out_values,
                    std::vector<int> parents, BackwardFn backward) {
  for (int p : parents) {
    if (p < 0 || p >= static_cast<int>(nodes_.size()))
      throw ArgumentError("tape: parent node " + std::to_string(p) +
                          " not on this tape");
  }
  Node node;
  node.shape = out_shape;
  node.grad.assign(out_values.size(), 0.0);
  node.parents = std::move(parents);
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  Tensor out(std::move(out_shape), std::move(out_values));
  out.tape_ = this;
  out.node_ = static_cast<int>(nodes_.size()) - 1;
  return out;
}

void Tape::backward(const Tensor& root) {
  if (root.tape() != this || root.node() < 0)
    throw ArgumentError("backward: root was not produced on this tape");
  if (root.size() != 1)
    throw ArgumentError("backward: root has shape " + shape_str(root.shape()) +
                        ", expected a scalar");
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  nodes_[root.node()].grad[0] = 1.0;
  for (int i = root.node(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.backward) continue;
    std::vector<std::vector<double>*> parent_grads;
    parent_grads.reserve(n.parents.size());
    for (int p : n.parents) parent_grads.push_back(&nodes_[p].grad);
    n.backward(n.grad, parent_grads);
  }
}

Tensor Tape::grad(const Tensor& t) const {
  if (t.tape() != this || t.node() < 0)
    throw ArgumentError("grad: tensor was not produced on this tape");
  const Node& n = nodes_[t.node()];
  return Tensor(n.shape, n.grad);
}

// ---------------------------------------------------------------------------
// Op plumbing
// ---------------------------------------------------------------------------

namespace {

Tape* joint_tape(const Tensor& a, const Tensor& b) {
  if (a.on_tape() && b.on_tape() && a.tape() != b.tape())
    throw ArgumentError("op: inputs live on two different tapes");
  return a.on_tape() ? a.tape() : b.tape();
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

void axpy(std::vector<double>& dst, double alpha, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += alpha * src[i];
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw DimensionError("matmul: expects rank-2 operands, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  const std::size_t k2 = b.shape()[0], n = b.shape()[1];
  if (k != k2)
    throw DimensionError("matmul: inner dimensions disagree, " +
                         shape_str(a.shape()) + " times " + shape_str(b.shape()));
  std::vector<double> out(m * n, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = av[i * k + l];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += ail * bv[l * n + j];
    }

  Tape* tape = joint_tape(a, b);
  if (!tape) return Tensor({m, n}, std::move(out));

  std::vector<int> parents;
  const bool a_taped = a.on_tape(), b_taped = b.on_tape();
  if (a_taped) parents.push_back(a.node());
  if (b_taped) parents.push_back(b.node());
  std::vector<double> a_cache = av, b_cache = bv;
  return tape->record(
      {m, n}, std::move(out), std::move(parents),
      [m, k, n, a_taped, b_taped, a_cache = std::move(a_cache),
       b_cache = std::move(b_cache)](const std::vector<double>& g,
                                     const std::vector<std::vector<double>*>& pg) {
        std::size_t slot = 0;
        if (a_taped) {
          std::vector<double>& da = *pg[slot++];
          // dA += G * B^T
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t l = 0; l < k; ++l) {
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j)
                acc += g[i * n + j] * b_cache[l * n + j];
              da[i * k + l] += acc;
            }
        }
        if (b_taped) {
          std::vector<double>& db = *pg[slot++];
          // dB += A^T * G
          for (std::size_t l = 0; l < k; ++l)
            for (std::size_t i = 0; i < m; ++i) {
              const double ail = a_cache[i * k + l];
              for (std::size_t j = 0; j < n; ++j)
                db[l * n + j] += ail * g[i * n + j];
            }
        }
      });
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2 || x.rank() != 1)
    throw DimensionError("matvec: expects rank-2 by rank-1, got " +
                         shape_str(w.shape()) + " and " + shape_str(x.shape()));
  const std::size_t m = w.shape()[0], n = w.shape()[1];
  if (n != x.shape()[0])
    throw DimensionError("matvec: " + shape_str(w.shape()) + " times " +
                         shape_str(x.shape()));
  std::vector<double> out(m, 0.0);
  const auto& wv = w.values();
  const auto& xv = x.values();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* row = wv.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * xv[j];
    out[i] = acc;
  }

  Tape* tape = joint_tape(w, x);
  if (!tape) return Tensor({m}, std::move(out));

  std::vector<int> parents;
  const bool w_taped = w.on_tape(), x_taped = x.on_tape();
  if (w_taped) parents.push_back(w.node());
  if (x_taped) parents.push_back(x.node());
  std::vector<double> w_cache = wv, x_cache = xv;
  return tape->record(
      {m}, std::move(out), std::move(parents),
      [m, n, w_taped, x_taped, w_cache = std::move(w_cache),
       x_cache = std::move(x_cache)](const std::vector<double>& g,
                                     const std::vector<std::vector<double>*>& pg) {
        std::size_t slot = 0;
        if (w_taped) {
          std::vector<double>& dw = *pg[slot++];
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            double* row = dw.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += gi * x_cache[j];
          }
        }
        if (x_taped) {
          std::vector<double>& dx = *pg[slot++];
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            const double* row = w_cache.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) dx[j] += gi * row[j];
          }
        }
      });
}

namespace {

// Shared implementation for add/sub/mul.
enum class Binop { kAdd, kSub, kMul };

Tensor binary_elementwise(const char* name, Binop op, const Tensor& a,
                          const Tensor& b) {
  require_same_shape(name, a, b);
  const std::size_t n = a.size();
  std::vector<double> out(n);
  const auto& av = a.values();
  const auto& bv = b.values();
  switch (op) {
    case Binop::kAdd:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i] + bv[i];
      break;
    case Binop::kSub:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i] - bv[i];
      break;
    case Binop::kMul:
      for (std::size_t i = 0; i < n; ++i) out[i] = av[i] * bv[i];
      break;
  }

  Tape* tape = joint_tape(a, b);
  if (!tape) return Tensor(a.shape(), std::move(out));

  std::vector<int> parents;
  const bool a_taped = a.on_tape(), b_taped = b.on_tape();
  if (a_taped) parents.push_back(a.node());
  if (b_taped) parents.push_back(b.node());
  std::vector<double> a_cache, b_cache;
  if (op == Binop::kMul) {
    if (b_taped) a_cache = av;
    if (a_taped) b_cache = bv;
  }
  return tape->record(
      a.shape(), std::move(out), std::move(parents),
      [op, a_taped, b_taped, a_cache = std::move(a_cache),
       b_cache = std::move(b_cache)](const std::vector<double>& g,
                                     const std::vector<std::vector<double>*>& pg) {
        std::size_t slot = 0;
        if (a_taped) {
          std::vector<double>& da = *pg[slot++];
          switch (op) {
            case Binop::kAdd:
            case Binop::kSub:
              axpy(da, 1.0, g);
              break;
            case Binop::kMul:
              for (std::size_t i = 0; i < g.size(); ++i)
                da[i] += g[i] * b_cache[i];
              break;
          }
        }
        if (b_taped) {
          std::vector<double>& db = *pg[slot++];
          switch (op) {
            case Binop::kAdd:
              axpy(db, 1.0, g);
              break;
            case Binop::kSub:
              axpy(db, -1.0, g);
              break;
            case Binop::kMul:
              for (std::size_t i = 0; i < g.size(); ++i)
                db[i] += g[i] * a_cache[i];
              break;
          }
        }
      });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary_elementwise("add", Binop::kAdd, a, b);
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return binary_elementwise("sub", Binop::kSub, a, b);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return binary_elementwise("mul", Binop::kMul, a, b);
}

Tensor elementwise(const Tensor& t, Unary f, double c) {
  const std::size_t n = t.size();
  std::vector<double> out(n);
  const auto& tv = t.values();
  for (std::size_t i = 0; i < n; ++i) {
    switch (f) {
      case Unary::kTanh:
        out[i] = std::tanh(tv[i]);
        break;
      case Unary::kSigmoid:
        out[i] = 1.0 / (1.0 + std::exp(-tv[i]));
        break;
      case Unary::kRelu:
        out[i] = tv[i] > 0.0 ? tv[i] : 0.0;
        break;
      case Unary::kAddConst:
        out[i] = tv[i] + c;
        break;
      case Unary::kScale:
        out[i] = tv[i] * c;
        break;
    }
  }

  if (!t.on_tape()) return Tensor(t.shape(), std::move(out));

  // tanh/sigmoid derivatives come from the cached output, relu from the
  // cached input sign.
  std::vector<double> cache;
  switch (f) {
    case Unary::kTanh:
    case Unary::kSigmoid:
      cache = out;
      break;
    case Unary::kRelu:
      cache = tv;
      break;
    case Unary::kAddConst:
    case Unary::kScale:
      break;
  }
  return t.tape()->record(
      t.shape(), std::move(out), {t.node()},
      [f, c, cache = std::move(cache)](const std::vector<double>& g,
                                       const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& dt = *pg[0];
        for (std::size_t i = 0; i < g.size(); ++i) {
          switch (f) {
            case Unary::kTanh:
              dt[i] += g[i] * (1.0 - cache[i] * cache[i]);
              break;
            case Unary::kSigmoid:
              dt[i] += g[i] * cache[i] * (1.0 - cache[i]);
              break;
            case Unary::kRelu:
              dt[i] += cache[i] > 0.0 ? g[i] : 0.0;
              break;
            case Unary::kAddConst:
              dt[i] += g[i];
              break;
            case Unary::kScale:
              dt[i] += g[i] * c;
              break;
          }
        }
      });
}

Tensor tanh(const Tensor& t) { return elementwise(t, Unary::kTanh); }
Tensor sigmoid(const Tensor& t) { return elementwise(t, Unary::kSigmoid); }
Tensor relu(const Tensor& t) { return elementwise(t, Unary::kRelu); }
Tensor add_const(const Tensor& t, double c) {
  return elementwise(t, Unary::kAddConst, c);
}
Tensor scale(const Tensor& t, double c) {
  return elementwise(t, Unary::kScale, c);
}

Tensor abs(const Tensor& t) {
  const std::size_t n = t.size();
  std::vector<double> out(n);
  const auto& tv = t.values();
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(tv[i]);
  if (!t.on_tape()) return Tensor(t.shape(), std::move(out));
  std::vector<double> cache = tv;
  return t.tape()->record(
      t.shape(), std::move(out), {t.node()},
      [cache = std::move(cache)](const std::vector<double>& g,
                                 const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& dt = *pg[0];
        // Subgradient 0 at exactly 0.
        for (std::size_t i = 0; i < g.size(); ++i)
          dt[i] += cache[i] > 0.0 ? g[i] : (cache[i] < 0.0 ? -g[i] : 0.0);
      });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ArgumentError("concat: empty part list");
  std::size_t total = 0;
  Tape* tape = nullptr;
  for (const Tensor& p : parts) {
    if (p.rank() != 1)
      throw DimensionError("concat: part of shape " + shape_str(p.shape()) +
                           " is not rank-1");
    total += p.size();
    if (p.on_tape()) {
      if (tape && tape != p.tape())
        throw ArgumentError("concat: parts live on two different tapes");
      tape = p.tape();
    }
  }
  std::vector<double> out;
  out.reserve(total);
  for (const Tensor& p : parts)
    out.insert(out.end(), p.values().begin(), p.values().end());

  if (!tape) return Tensor({total}, std::move(out));

  // Record (offset, length) per taped part so the gradient slices back.
  std::vector<int> parents;
  std::vector<std::pair<std::size_t, std::size_t>> taped_spans;
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    if (p.on_tape()) {
      parents.push_back(p.node());
      taped_spans.emplace_back(offset, p.size());
    }
    offset += p.size();
  }
  return tape->record(
      {total}, std::move(out), std::move(parents),
      [taped_spans = std::move(taped_spans)](
          const std::vector<double>& g,
          const std::vector<std::vector<double>*>& pg) {
        for (std::size_t s = 0; s < taped_spans.size(); ++s) {
          auto [off, len] = taped_spans[s];
          std::vector<double>& dp = *pg[s];
          for (std::size_t i = 0; i < len; ++i) dp[i] += g[off + i];
        }
      });
}

Tensor sum(const Tensor& t) {
  double acc = 0.0;
  for (double v : t.values()) acc += v;
  if (!t.on_tape()) return Tensor::scalar(acc);
  const std::size_t n = t.size();
  return t.tape()->record(
      {1}, {acc}, {t.node()},
      [n](const std::vector<double>& g,
          const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& dt = *pg[0];
        for (std::size_t i = 0; i < n; ++i) dt[i] += g[0];
      });
}

Tensor mean(const Tensor& t) {
  if (t.size() == 0) throw ArgumentError("mean: empty tensor");
  return scale(sum(t), 1.0 / static_cast<double>(t.size()));
}

Tensor slice1(const Tensor& t, std::size_t offset, std::size_t len) {
  if (t.rank() != 1)
    throw DimensionError("slice1: expects rank-1, got " + shape_str(t.shape()));
  if (offset + len > t.size())
    throw ArgumentError("slice1: range [" + std::to_string(offset) + ", " +
                        std::to_string(offset + len) + ") exceeds length " +
                        std::to_string(t.size()));
  std::vector<double> out(t.values().begin() + offset,
                          t.values().begin() + offset + len);
  return Tensor({len}, std::move(out));
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

double check_gradients(const ScalarFnMulti& fn, const std::vector<Tensor>& points,
                       double step) {
  if (step <= 0.0) throw ArgumentError("check_gradients: step must be > 0");

  auto eval = [&](const std::vector<Tensor>& at) {
    Tape tape;
    std::vector<Tensor> leaves;
    leaves.reserve(at.size());
    for (const Tensor& p : at) leaves.push_back(tape.leaf(p));
    Tensor y = fn(tape, leaves);
    if (y.size() != 1)
      throw ArgumentError("check_gradients: function value has shape " +
                          shape_str(y.shape()) + ", expected a scalar");
    if (!std::isfinite(y.item()))
      throw NumericError("check_gradients: non-finite function value");
    return y.item();
  };

  // Analytic pass.
  Tape tape;
  std::vector<Tensor> leaves;
  leaves.reserve(points.size());
  for (const Tensor& p : points) leaves.push_back(tape.leaf(p));
  Tensor y = fn(tape, leaves);
  if (y.size() != 1)
    throw ArgumentError("check_gradients: function value has shape " +
                        shape_str(y.shape()) + ", expected a scalar");
  if (!std::isfinite(y.item()))
    throw NumericError("check_gradients: non-finite function value");
  tape.backward(y);

  double worst = 0.0;
  std::vector<Tensor> probe = points;
  for (std::size_t p = 0; p < points.size(); ++p) {
    Tensor analytic = tape.grad(leaves[p]);
    for (std::size_t i = 0; i < points[p].size(); ++i) {
      const double orig = probe[p][i];
      probe[p][i] = orig + step;
      const double f_plus = eval(probe);
      probe[p][i] = orig - step;
      const double f_minus = eval(probe);
      probe[p][i] = orig;
      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double a = analytic[i];
      const double denom = std::max(1e-12, std::fabs(a) + std::fabs(numeric));
      worst = std::max(worst, std::fabs(a - numeric) / denom);
    }
  }
  return worst;
}

double check_gradients(const ScalarFn& fn, const Tensor& point, double step) {
  ScalarFnMulti wrapped = [&fn](Tape& tape, const std::vector<Tensor>& xs) {
    return fn(tape, xs[0]);
  };
  return check_gradients(wrapped, std::vector<Tensor>{point}, step);
}

}  // namespace rtnlab
