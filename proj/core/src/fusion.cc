// core/src/fusion.cc

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

#include "rtnlab/fusion.hpp"

#include <string>

#include "rtnlab/errors.hpp"

namespace rtnlab {

namespace {

// Inputs extended with the trailing 1 ahead of time; unused slots hold a
// single [1] so the kernel can always run the 3-nested loop.
std::vector<double> extended(const Tensor& t) {
  std::vector<double> e = t.values();
  e.push_back(1.0);
  return e;
}

}  // namespace

FusedVector tensor_fuse(const std::vector<Tensor>& embeddings) {
  if (embeddings.empty()) throw ArgumentError("tensor_fuse: empty modality list");
  if (embeddings.size() > 3)
    throw ArgumentError("tensor_fuse: unsupported arity " +
                        std::to_string(embeddings.size()) +
                        ", at most 3 modalities");

  Tape* tape = nullptr;
  std::vector<std::size_t> source_dims;
  for (const Tensor& e : embeddings) {
    if (e.rank() != 1)
      throw DimensionError("tensor_fuse: embedding of shape " +
                           shape_str(e.shape()) + " is not rank-1");
    if (e.size() == 0)
      throw ArgumentError("tensor_fuse: zero-length embedding");
    source_dims.push_back(e.size());
    if (e.on_tape()) {
      if (tape && tape != e.tape())
        throw ArgumentError("tensor_fuse: inputs live on two different tapes");
      tape = e.tape();
    }
  }

  const std::size_t arity = embeddings.size();
  std::vector<std::vector<double>> ext(3, std::vector<double>{1.0});
  for (std::size_t m = 0; m < arity; ++m) ext[m] = extended(embeddings[m]);
  const std::size_t na = ext[0].size(), nb = ext[1].size(), nc = ext[2].size();

  std::vector<double> out(na * nb * nc);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      const double ab = ext[0][i] * ext[1][j];
      double* row = out.data() + (i * nb + j) * nc;
      for (std::size_t k = 0; k < nc; ++k) row[k] = ab * ext[2][k];
    }

  FusedVector fused;
  fused.arity = arity;
  fused.source_dims = source_dims;
  const std::size_t total = out.size();
  if (!tape) {
    fused.values = Tensor({total}, std::move(out));
    return fused;
  }

  std::vector<int> parents;
  std::vector<bool> taped(arity);
  for (std::size_t m = 0; m < arity; ++m) {
    taped[m] = embeddings[m].on_tape();
    if (taped[m]) parents.push_back(embeddings[m].node());
  }
  fused.values = tape->record(
      {total}, std::move(out), std::move(parents),
      [ext, taped, arity, na, nb, nc](const std::vector<double>& g,
                                      const std::vector<std::vector<double>*>& pg) {
        // d out[i,j,k]/d a[i] = b[j]*c[k]; the appended-1 slot is constant
        // and takes no gradient.
        std::size_t slot = 0;
        for (std::size_t m = 0; m < arity; ++m) {
          if (!taped[m]) continue;
          std::vector<double>& d = *pg[slot++];
          for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb; ++j) {
              const std::size_t base = (i * nb + j) * nc;
              for (std::size_t k = 0; k < nc; ++k) {
                const double gv = g[base + k];
                if (gv == 0.0) continue;
                if (m == 0 && i < d.size()) d[i] += gv * ext[1][j] * ext[2][k];
                if (m == 1 && j < d.size()) d[j] += gv * ext[0][i] * ext[2][k];
                if (m == 2 && k < d.size()) d[k] += gv * ext[0][i] * ext[1][j];
              }
            }
        }
      });
  return fused;
}

FusedVector early_fuse(const std::vector<Tensor>& embeddings) {
  if (embeddings.empty()) throw ArgumentError("early_fuse: empty modality list");
  FusedVector fused;
  fused.arity = embeddings.size();
  for (const Tensor& e : embeddings) fused.source_dims.push_back(e.size());
  fused.values = concat(embeddings);
  return fused;
}

std::size_t fused_dim(const std::vector<std::size_t>& source_dims,
                      FusionMode mode) {
  std::size_t out = (mode == FusionMode::kTensor) ? 1 : 0;
  for (std::size_t d : source_dims) {
    if (d == 0) throw ArgumentError("fused_dim: zero modality size");
    if (mode == FusionMode::kTensor)
      out *= d + 1;
    else
      out += d;
  }
  return out;
}

}  // namespace rtnlab
