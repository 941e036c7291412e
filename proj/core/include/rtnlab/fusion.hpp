// rtnlab/fusion.hpp

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

#ifndef RTNLAB_FUSION_HPP_
#define RTNLAB_FUSION_HPP_

#include <cstddef>
#include <vector>

#include "rtnlab/ndtensor.hpp"

namespace rtnlab {

enum class FusionMode { kTensor, kEarly };

struct FusedVector {
  Tensor values;                         // rank-1
  std::size_t arity = 0;                 // number of fused modalities
  std::vector<std::size_t> source_dims;  // per-modality embedding sizes
};

// Outer product of the inputs, each extended with a trailing constant 1.
// The flattening is row-major with the first modality's index varying
// slowest, so the result holds every unimodal, bimodal, and trimodal
// product term. Supports 1 to 3 modalities. Differentiable.
FusedVector tensor_fuse(const std::vector<Tensor>& embeddings);

// Plain concatenation in modality order.
FusedVector early_fuse(const std::vector<Tensor>& embeddings);

// Output length for a fusion of the given per-modality sizes:
// product of (d+1) for tensor fusion, sum of d for early fusion.
std::size_t fused_dim(const std::vector<std::size_t>& source_dims,
                      FusionMode mode);

}  // namespace rtnlab

#endif  // RTNLAB_FUSION_HPP_
