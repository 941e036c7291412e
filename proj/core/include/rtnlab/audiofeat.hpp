// rtnlab/audiofeat.hpp

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

// Audio-side feature algorithms: phoneme posteriorgram statistics and the
// i-vector pipeline (diagonal-covariance UBM, Baum-Welch statistics,
// total-variability training, i-vector extraction).

#ifndef RTNLAB_AUDIOFEAT_HPP_
#define RTNLAB_AUDIOFEAT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rtnlab/ndtensor.hpp"

namespace rtnlab {

// Frames x states matrix of acoustic posteriors; every row is nonnegative
// and sums to 1 (within 1e-6).
struct PosteriorMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  static PosteriorMatrix from_rows(const std::vector<std::vector<double>>& r);
  double at(std::size_t t, std::size_t s) const { return values[t * cols + s]; }
  double& at(std::size_t t, std::size_t s) { return values[t * cols + s]; }
};

// Maps each acoustic state (e.g. a triphone state) onto a monophone id.
struct StateMap {
  std::vector<std::size_t> state_to_phone;
  std::size_t num_phones = 0;

  static StateMap from_assignments(std::vector<std::size_t> assignments);
};

// Diagonal-covariance Gaussian mixture acting as the universal background
// model. Variances are floored at kVarianceFloor.
struct Ubm {
  std::vector<double> weights;               // C, simplex
  std::vector<std::vector<double>> means;    // C x D
  std::vector<std::vector<double>> variances;  // C x D, >= floor

  std::size_t components() const { return weights.size(); }
  std::size_t dim() const { return means.empty() ? 0 : means[0].size(); }
};

inline constexpr double kVarianceFloor = 1e-4;

// Total-variability matrix: (C*D) x R, rows grouped by component.
struct TMatrixModel {
  std::size_t rank = 0;
  std::vector<std::vector<double>> rows;  // C*D rows of length R
};

// Per-utterance Baum-Welch sufficient statistics: zeroth order N_c and
// mean-centered first order F_c.
struct BwStats {
  std::vector<double> n;               // C
  std::vector<std::vector<double>> f;  // C x D
};

struct IVector {
  std::vector<double> w;  // R
};

using Frames = std::vector<std::vector<double>>;

// out[t][j] = sum over states i with map[i] == j of p[t][i]; row mass is
// conserved. Column count mismatch against the map is a dimension error.
PosteriorMatrix monophone_posteriors(const PosteriorMatrix& p,
                                     const StateMap& map);

// Per-phone mean over frames followed by per-phone population standard
// deviation: a rank-1 tensor of length 2M. Zero frames is a data error.
Tensor phoneme_stats(const PosteriorMatrix& q);

// EM-fitted diagonal GMM with k-means++ style seeding. The per-iteration
// data log-likelihood (appended to `ll_trace` when non-null, one entry per
// EM iteration) is non-decreasing within 1e-8. Components that collect no
// responsibility mass are reseeded from a random frame and logged.
Ubm ubm_fit(const Frames& frames, std::size_t components, std::size_t iters,
            std::uint64_t seed, std::vector<double>* ll_trace = nullptr);

// Row t = posterior responsibilities of each component for frame t,
// computed in the log domain.
PosteriorMatrix gmm_posteriors(const Ubm& ubm, const Frames& frames);

// N_c = sum_t p[t][c]; F_c = sum_t p[t][c] * (x_t - m_c).
BwStats bw_stats(const PosteriorMatrix& p, const Frames& frames,
                 const Ubm& ubm);

// Posterior mean of the latent utterance vector:
//   w = L^-1 T' Sigma^-1 F,  L = I + sum_c N_c T_c' Sigma_c^-1 T_c.
IVector extract_ivector(const BwStats& stats, const TMatrixModel& tv,
                        const Ubm& ubm);

// Standard total-variability EM (diagonal covariances, no minimum-divergence
// step): E-step computes each utterance's posterior mean/covariance of w,
// M-step solves per-component least squares for the rows of T. The auxiliary
// objective (appended to `objective_trace` when non-null; one entry per
// iteration plus a final entry after the last update) is non-decreasing
// within 1e-6. iters == 0 returns the seeded random initialization.
TMatrixModel tv_train(const std::vector<BwStats>& stats, const Ubm& ubm,
                      std::size_t rank, std::size_t iters, std::uint64_t seed,
                      std::vector<double>* objective_trace = nullptr);

// Validates and renormalizes externally produced posterior rows: negative
// entries are rejected, rows are scaled to sum to 1. `path` and `line_no`
// feed the parse-error message.
PosteriorMatrix ingest_posteriors(const std::vector<std::vector<double>>& rows,
                                  const std::string& path,
                                  std::size_t line_no);

// --- file I/O ----------------------------------------------------------------

// JSON Lines `{"utt": id, "frames": [[...], ...]}`.
std::vector<std::pair<std::string, Frames>> load_frames_file(
    const std::string& path);

// JSON Lines `{"utt": id, "posteriors": [[...], ...]}`; rows ingested via
// ingest_posteriors.
std::vector<std::pair<std::string, PosteriorMatrix>> load_posteriors_file(
    const std::string& path);

// One integer (state -> phone id) per line.
StateMap load_state_map(const std::string& path);

void save_ubm(const Ubm& ubm, const std::string& path);
Ubm load_ubm(const std::string& path);
void save_tv(const TMatrixModel& tv, const std::string& path);
TMatrixModel load_tv(const std::string& path);

}  // namespace rtnlab

#endif  // RTNLAB_AUDIOFEAT_HPP_
