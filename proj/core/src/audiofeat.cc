// core/src/audiofeat.cc

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

#include "rtnlab/audiofeat.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "rtnlab/errors.hpp"
#include "rtnlab/log.hpp"
#include "rtnlab/rng.hpp"

namespace rtnlab {

namespace {

using json = nlohmann::json;

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)

// --- dense symmetric positive-definite solves (hand-rolled Cholesky) ---------

// In-place lower-triangular Cholesky factor of a flat row-major n x n matrix.
void cholesky(std::vector<double>& a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      if (i == j) {
        if (s <= 0.0)
          throw NumericError("cholesky: non-positive pivot at row " +
                             std::to_string(i));
        a[i * n + i] = std::sqrt(s);
      } else {
        a[i * n + j] = s / a[j * n + j];
      }
    }
    for (std::size_t j = i + 1; j < n; ++j) a[i * n + j] = 0.0;
  }
}

// Solves L L' x = b given the lower factor; b is overwritten with x.
void cholesky_solve(const std::vector<double>& l, std::size_t n,
                    std::vector<double>& b) {
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * b[k];
    b[i] = s / l[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l[k * n + ii] * b[k];
    b[ii] = s / l[ii * n + ii];
  }
}

double cholesky_log_det(const std::vector<double>& l, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::log(l[i * n + i]);
  return 2.0 * s;
}

std::size_t frames_dim(const Frames& frames, const char* who) {
  if (frames.empty()) throw DataError(std::string(who) + ": no frames");
  const std::size_t d = frames[0].size();
  if (d == 0) throw DataError(std::string(who) + ": zero-dimensional frames");
  for (const auto& f : frames)
    if (f.size() != d)
      throw DimensionError(std::string(who) + ": ragged frames (" +
                           std::to_string(f.size()) + " vs " +
                           std::to_string(d) + ")");
  return d;
}

// Posterior-of-w system for one utterance under the current T:
//   L = I + sum_{c,d} (N_c / var_cd) t_cd t_cd',  a = sum_{c,d} (F_cd / var_cd) t_cd.
void build_posterior_system(const BwStats& stats, const TMatrixModel& tv,
                            const Ubm& ubm, std::vector<double>& l_mat,
                            std::vector<double>& a_vec) {
  const std::size_t r = tv.rank, c_n = ubm.components(), d_n = ubm.dim();
  l_mat.assign(r * r, 0.0);
  a_vec.assign(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) l_mat[i * r + i] = 1.0;
  for (std::size_t c = 0; c < c_n; ++c) {
    const double n_c = stats.n[c];
    for (std::size_t d = 0; d < d_n; ++d) {
      const std::vector<double>& row = tv.rows[c * d_n + d];
      const double inv_var = 1.0 / ubm.variances[c][d];
      const double nw = n_c * inv_var;
      const double fw = stats.f[c][d] * inv_var;
      for (std::size_t i = 0; i < r; ++i) {
        a_vec[i] += fw * row[i];
        if (nw != 0.0) {
          const double ri = nw * row[i];
          for (std::size_t j = 0; j <= i; ++j) l_mat[i * r + j] += ri * row[j];
        }
      }
    }
  }
  // Mirror the accumulated lower triangle.
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j) l_mat[i * r + j] = l_mat[j * r + i];
}

void check_stats_shape(const BwStats& stats, const Ubm& ubm, const char* who) {
  if (stats.n.size() != ubm.components() ||
      stats.f.size() != ubm.components())
    throw DimensionError(std::string(who) + ": stats for " +
                         std::to_string(stats.n.size()) + " components, UBM has " +
                         std::to_string(ubm.components()));
  for (const auto& f : stats.f)
    if (f.size() != ubm.dim())
      throw DimensionError(std::string(who) + ": first-order stats dim " +
                           std::to_string(f.size()) + " != UBM dim " +
                           std::to_string(ubm.dim()));
}

void check_tv_shape(const TMatrixModel& tv, const Ubm& ubm, const char* who) {
  if (tv.rows.size() != ubm.components() * ubm.dim())
    throw DimensionError(std::string(who) + ": T has " +
                         std::to_string(tv.rows.size()) + " rows, expected " +
                         std::to_string(ubm.components() * ubm.dim()));
  for (const auto& row : tv.rows)
    if (row.size() != tv.rank)
      throw DimensionError(std::string(who) + ": T row length " +
                           std::to_string(row.size()) + " != rank " +
                           std::to_string(tv.rank));
}

json parse_json_line(const std::string& line, const std::string& path,
                     std::size_t line_no) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw ParseError(path + ":" + std::to_string(line_no) + ": invalid JSON");
  return j;
}

std::vector<std::vector<double>> json_matrix(const json& j,
                                             const std::string& path,
                                             std::size_t line_no,
                                             const char* field) {
  if (!j.is_array())
    throw ParseError(path + ":" + std::to_string(line_no) + ": '" + field +
                     "' must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& jr : j) {
    if (!jr.is_array())
      throw ParseError(path + ":" + std::to_string(line_no) + ": '" + field +
                       "' rows must be arrays");
    std::vector<double> row;
    for (const auto& v : jr) {
      if (!v.is_number())
        throw ParseError(path + ":" + std::to_string(line_no) + ": '" + field +
                         "' entries must be numbers");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

PosteriorMatrix PosteriorMatrix::from_rows(
    const std::vector<std::vector<double>>& r) {
  PosteriorMatrix p;
  p.rows = r.size();
  p.cols = r.empty() ? 0 : r[0].size();
  p.values.reserve(p.rows * p.cols);
  for (const auto& row : r) {
    if (row.size() != p.cols)
      throw DimensionError("PosteriorMatrix: ragged rows (" +
                           std::to_string(row.size()) + " vs " +
                           std::to_string(p.cols) + ")");
    p.values.insert(p.values.end(), row.begin(), row.end());
  }
  return p;
}

StateMap StateMap::from_assignments(std::vector<std::size_t> assignments) {
  StateMap m;
  m.state_to_phone = std::move(assignments);
  for (std::size_t phone : m.state_to_phone)
    m.num_phones = std::max(m.num_phones, phone + 1);
  return m;
}

PosteriorMatrix monophone_posteriors(const PosteriorMatrix& p,
                                     const StateMap& map) {
  if (p.cols != map.state_to_phone.size())
    throw DimensionError("monophone_posteriors: " + std::to_string(p.cols) +
                         " states vs map of length " +
                         std::to_string(map.state_to_phone.size()));
  PosteriorMatrix out;
  out.rows = p.rows;
  out.cols = map.num_phones;
  out.values.assign(out.rows * out.cols, 0.0);
  for (std::size_t t = 0; t < p.rows; ++t)
    for (std::size_t s = 0; s < p.cols; ++s)
      out.at(t, map.state_to_phone[s]) += p.at(t, s);
  return out;
}

Tensor phoneme_stats(const PosteriorMatrix& q) {
  if (q.rows == 0) throw DataError("phoneme_stats: zero frames");
  const std::size_t m = q.cols;
  std::vector<double> out(2 * m, 0.0);
  for (std::size_t t = 0; t < q.rows; ++t)
    for (std::size_t j = 0; j < m; ++j) out[j] += q.at(t, j);
  for (std::size_t j = 0; j < m; ++j) out[j] /= static_cast<double>(q.rows);
  for (std::size_t t = 0; t < q.rows; ++t)
    for (std::size_t j = 0; j < m; ++j) {
      const double d = q.at(t, j) - out[j];
      out[m + j] += d * d;
    }
  for (std::size_t j = 0; j < m; ++j)
    out[m + j] = std::sqrt(out[m + j] / static_cast<double>(q.rows));
  return Tensor({2 * m}, std::move(out));
}

Ubm ubm_fit(const Frames& frames, std::size_t components, std::size_t iters,
            std::uint64_t seed, std::vector<double>* ll_trace) {
  if (components == 0) throw ArgumentError("ubm_fit: zero components");
  if (iters == 0) throw ArgumentError("ubm_fit: at least one EM iteration required");
  const std::size_t d_n = frames_dim(frames, "ubm_fit");
  const std::size_t t_n = frames.size();
  if (t_n < components)
    throw DataError("ubm_fit: " + std::to_string(t_n) + " frames for " +
                    std::to_string(components) + " components");

  // Global per-dimension population variance; also the reseed fallback.
  std::vector<double> global_mean(d_n, 0.0), global_var(d_n, 0.0);
  for (const auto& f : frames)
    for (std::size_t d = 0; d < d_n; ++d) global_mean[d] += f[d];
  for (double& v : global_mean) v /= static_cast<double>(t_n);
  for (const auto& f : frames)
    for (std::size_t d = 0; d < d_n; ++d) {
      const double diff = f[d] - global_mean[d];
      global_var[d] += diff * diff;
    }
  for (double& v : global_var)
    v = std::max(v / static_cast<double>(t_n), kVarianceFloor);

  // k-means++ style seeding of the component means.
  Rng rng(seed);
  Ubm ubm;
  ubm.weights.assign(components, 1.0 / static_cast<double>(components));
  ubm.means.push_back(frames[rng.below(t_n)]);
  std::vector<double> d2(t_n);
  while (ubm.means.size() < components) {
    double total = 0.0;
    for (std::size_t t = 0; t < t_n; ++t) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : ubm.means) {
        double dist = 0.0;
        for (std::size_t d = 0; d < d_n; ++d) {
          const double diff = frames[t][d] - c[d];
          dist += diff * diff;
        }
        best = std::min(best, dist);
      }
      d2[t] = best;
      total += best;
    }
    std::size_t pick = rng.below(t_n);
    if (total > 0.0) {
      double r = rng.uniform01() * total, cum = 0.0;
      for (std::size_t t = 0; t < t_n; ++t) {
        cum += d2[t];
        if (r <= cum) {
          pick = t;
          break;
        }
      }
    }
    ubm.means.push_back(frames[pick]);
  }
  ubm.variances.assign(components, global_var);

  std::vector<double> resp(t_n * components);
  std::vector<double> lp(components);
  for (std::size_t iter = 0; iter < iters; ++iter) {
    // E-step in the log domain; accumulates the data log-likelihood.
    double total_ll = 0.0;
    for (std::size_t t = 0; t < t_n; ++t) {
      for (std::size_t c = 0; c < components; ++c) {
        double quad = 0.0, logdet = 0.0;
        for (std::size_t d = 0; d < d_n; ++d) {
          const double var = ubm.variances[c][d];
          const double diff = frames[t][d] - ubm.means[c][d];
          quad += diff * diff / var;
          logdet += std::log(var);
        }
        lp[c] = std::log(ubm.weights[c]) -
                0.5 * (static_cast<double>(d_n) * kLogTwoPi + logdet + quad);
      }
      const double m = *std::max_element(lp.begin(), lp.end());
      double z = 0.0;
      for (std::size_t c = 0; c < components; ++c) z += std::exp(lp[c] - m);
      const double row_ll = m + std::log(z);
      total_ll += row_ll;
      for (std::size_t c = 0; c < components; ++c)
        resp[t * components + c] = std::exp(lp[c] - row_ll);
    }
    if (ll_trace) ll_trace->push_back(total_ll);

    // M-step with a reseed guard for components that collected no mass.
    for (std::size_t c = 0; c < components; ++c) {
      double n_c = 0.0;
      for (std::size_t t = 0; t < t_n; ++t) n_c += resp[t * components + c];
      if (n_c < 1e-8) {
        ubm.means[c] = frames[rng.below(t_n)];
        ubm.variances[c] = global_var;
        ubm.weights[c] = 1.0 / static_cast<double>(t_n);
        log_note("ubm_fit: component " + std::to_string(c) +
                 " collapsed; reseeded from a random frame");
        continue;
      }
      std::vector<double> mean(d_n, 0.0), var(d_n, 0.0);
      for (std::size_t t = 0; t < t_n; ++t) {
        const double r = resp[t * components + c];
        for (std::size_t d = 0; d < d_n; ++d) mean[d] += r * frames[t][d];
      }
      for (double& v : mean) v /= n_c;
      for (std::size_t t = 0; t < t_n; ++t) {
        const double r = resp[t * components + c];
        for (std::size_t d = 0; d < d_n; ++d) {
          const double diff = frames[t][d] - mean[d];
          var[d] += r * diff * diff;
        }
      }
      for (double& v : var) v = std::max(v / n_c, kVarianceFloor);
      ubm.means[c] = std::move(mean);
      ubm.variances[c] = std::move(var);
      ubm.weights[c] = n_c / static_cast<double>(t_n);
    }
    const double wsum =
        std::accumulate(ubm.weights.begin(), ubm.weights.end(), 0.0);
    for (double& w : ubm.weights) w /= wsum;
  }
  return ubm;
}

PosteriorMatrix gmm_posteriors(const Ubm& ubm, const Frames& frames) {
  const std::size_t d_n = frames_dim(frames, "gmm_posteriors");
  if (d_n != ubm.dim())
    throw DimensionError("gmm_posteriors: frame dim " + std::to_string(d_n) +
                         " != UBM dim " + std::to_string(ubm.dim()));
  const std::size_t c_n = ubm.components();
  double wsum = 0.0;
  for (double w : ubm.weights) {
    if (w < 0.0) throw ArgumentError("gmm_posteriors: negative mixture weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw ArgumentError("gmm_posteriors: zero mixture weights");

  PosteriorMatrix out;
  out.rows = frames.size();
  out.cols = c_n;
  out.values.assign(out.rows * out.cols, 0.0);
  std::vector<double> lp(c_n);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    for (std::size_t c = 0; c < c_n; ++c) {
      double quad = 0.0, logdet = 0.0;
      for (std::size_t d = 0; d < d_n; ++d) {
        const double var = ubm.variances[c][d];
        const double diff = frames[t][d] - ubm.means[c][d];
        quad += diff * diff / var;
        logdet += std::log(var);
      }
      lp[c] = std::log(ubm.weights[c]) -
              0.5 * (static_cast<double>(d_n) * kLogTwoPi + logdet + quad);
    }
    const double m = *std::max_element(lp.begin(), lp.end());
    double z = 0.0;
    for (std::size_t c = 0; c < c_n; ++c) z += std::exp(lp[c] - m);
    const double row_ll = m + std::log(z);
    for (std::size_t c = 0; c < c_n; ++c)
      out.at(t, c) = std::exp(lp[c] - row_ll);
  }
  return out;
}

BwStats bw_stats(const PosteriorMatrix& p, const Frames& frames,
                 const Ubm& ubm) {
  if (p.rows != frames.size())
    throw DimensionError("bw_stats: " + std::to_string(p.rows) +
                         " posterior rows vs " + std::to_string(frames.size()) +
                         " frames");
  if (p.cols != ubm.components())
    throw DimensionError("bw_stats: " + std::to_string(p.cols) +
                         " posterior columns vs " +
                         std::to_string(ubm.components()) + " components");
  const std::size_t d_n = frames_dim(frames, "bw_stats");
  if (d_n != ubm.dim())
    throw DimensionError("bw_stats: frame dim " + std::to_string(d_n) +
                         " != UBM dim " + std::to_string(ubm.dim()));

  BwStats stats;
  stats.n.assign(p.cols, 0.0);
  stats.f.assign(p.cols, std::vector<double>(d_n, 0.0));
  for (std::size_t t = 0; t < p.rows; ++t)
    for (std::size_t c = 0; c < p.cols; ++c) {
      const double g = p.at(t, c);
      stats.n[c] += g;
      for (std::size_t d = 0; d < d_n; ++d)
        stats.f[c][d] += g * (frames[t][d] - ubm.means[c][d]);
    }
  return stats;
}

IVector extract_ivector(const BwStats& stats, const TMatrixModel& tv,
                        const Ubm& ubm) {
  check_stats_shape(stats, ubm, "extract_ivector");
  check_tv_shape(tv, ubm, "extract_ivector");
  std::vector<double> l_mat, w;
  build_posterior_system(stats, tv, ubm, l_mat, w);
  cholesky(l_mat, tv.rank);  // SPD by construction (I + PSD)
  cholesky_solve(l_mat, tv.rank, w);
  return IVector{std::move(w)};
}

TMatrixModel tv_train(const std::vector<BwStats>& stats, const Ubm& ubm,
                      std::size_t rank, std::size_t iters, std::uint64_t seed,
                      std::vector<double>* objective_trace) {
  if (rank == 0) throw ArgumentError("tv_train: rank must be >= 1");
  if (stats.size() < 2)
    throw DataError("tv_train: need at least 2 utterances, got " +
                    std::to_string(stats.size()));
  const std::size_t c_n = ubm.components(), d_n = ubm.dim();
  if (rank > c_n * d_n)
    throw ConfigError("tv_train: rank " + std::to_string(rank) +
                      " exceeds supervector size " + std::to_string(c_n * d_n));
  for (const auto& s : stats) check_stats_shape(s, ubm, "tv_train");

  Rng rng(seed);
  TMatrixModel tv;
  tv.rank = rank;
  tv.rows.assign(c_n * d_n, std::vector<double>(rank));
  for (auto& row : tv.rows)
    for (double& v : row) v = rng.gaussian(0.0, 0.1);

  const std::size_t r = rank;
  std::vector<double> l_mat, a_vec, cov(r * r), unit(r);
  std::vector<std::vector<double>> a_acc(c_n), b_acc(c_n);
  auto objective_and_moments = [&](bool accumulate) {
    if (accumulate) {
      for (std::size_t c = 0; c < c_n; ++c) {
        a_acc[c].assign(r * r, 0.0);
        b_acc[c].assign(d_n * r, 0.0);
      }
    }
    double objective = 0.0;
    for (const BwStats& s : stats) {
      build_posterior_system(s, tv, ubm, l_mat, a_vec);
      cholesky(l_mat, r);
      const double logdet = cholesky_log_det(l_mat, r);
      std::vector<double> w_bar = a_vec;
      cholesky_solve(l_mat, r, w_bar);
      double quad = 0.0;
      for (std::size_t i = 0; i < r; ++i) quad += a_vec[i] * w_bar[i];
      objective += 0.5 * (quad - logdet);
      if (!accumulate) continue;

      // E[ww'] = L^-1 + w_bar w_bar'.
      for (std::size_t i = 0; i < r; ++i) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[i] = 1.0;
        cholesky_solve(l_mat, r, unit);
        for (std::size_t j = 0; j < r; ++j) cov[i * r + j] = unit[j];
      }
      for (std::size_t c = 0; c < c_n; ++c) {
        const double n_c = s.n[c];
        if (n_c != 0.0)
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j)
              a_acc[c][i * r + j] +=
                  n_c * (cov[i * r + j] + w_bar[i] * w_bar[j]);
        for (std::size_t d = 0; d < d_n; ++d) {
          const double f = s.f[c][d];
          if (f != 0.0)
            for (std::size_t j = 0; j < r; ++j)
              b_acc[c][d * r + j] += f * w_bar[j];
        }
      }
    }
    return objective;
  };

  for (std::size_t iter = 0; iter < iters; ++iter) {
    const double objective = objective_and_moments(true);
    if (objective_trace) objective_trace->push_back(objective);

    // M-step: per component, T_c = B_c A_c^-1 (solved row by row).
    for (std::size_t c = 0; c < c_n; ++c) {
      std::vector<double> a_chol = a_acc[c];
      try {
        cholesky(a_chol, r);
      } catch (const NumericError&) {
        log_note("tv_train: component " + std::to_string(c) +
                 " has no accumulated mass; rows kept");
        continue;
      }
      for (std::size_t d = 0; d < d_n; ++d) {
        std::vector<double> rhs(b_acc[c].begin() + d * r,
                                b_acc[c].begin() + (d + 1) * r);
        cholesky_solve(a_chol, r, rhs);
        tv.rows[c * d_n + d] = std::move(rhs);
      }
    }
  }
  if (objective_trace && iters > 0)
    objective_trace->push_back(objective_and_moments(false));
  return tv;
}

PosteriorMatrix ingest_posteriors(const std::vector<std::vector<double>>& rows,
                                  const std::string& path,
                                  std::size_t line_no) {
  PosteriorMatrix p = PosteriorMatrix::from_rows(rows);
  for (std::size_t t = 0; t < p.rows; ++t) {
    double sum = 0.0;
    for (std::size_t s = 0; s < p.cols; ++s) {
      const double v = p.at(t, s);
      if (!(v >= 0.0))
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": negative posterior in row " + std::to_string(t));
      sum += v;
    }
    if (sum <= 0.0)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": zero-mass posterior row " + std::to_string(t));
    for (std::size_t s = 0; s < p.cols; ++s) p.at(t, s) /= sum;
  }
  return p;
}

std::vector<std::pair<std::string, Frames>> load_frames_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::pair<std::string, Frames>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_json_line(line, path, line_no);
    if (!j.is_object() || !j.contains("utt") || !j.contains("frames") ||
        !j["utt"].is_string())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected {\"utt\": id, \"frames\": [[...]]}");
    out.emplace_back(j["utt"].get<std::string>(),
                     json_matrix(j["frames"], path, line_no, "frames"));
  }
  return out;
}

std::vector<std::pair<std::string, PosteriorMatrix>> load_posteriors_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::pair<std::string, PosteriorMatrix>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = parse_json_line(line, path, line_no);
    if (!j.is_object() || !j.contains("utt") || !j.contains("posteriors") ||
        !j["utt"].is_string())
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected {\"utt\": id, \"posteriors\": [[...]]}");
    out.emplace_back(
        j["utt"].get<std::string>(),
        ingest_posteriors(json_matrix(j["posteriors"], path, line_no,
                                      "posteriors"),
                          path, line_no));
  }
  return out;
}

StateMap load_state_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::size_t> assignments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(line, &pos);
      if (pos != line.size() || v < 0) throw std::invalid_argument(line);
      assignments.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected a nonnegative integer, got '" + line + "'");
    }
  }
  if (assignments.empty()) throw DataError(path + ": empty state map");
  return StateMap::from_assignments(std::move(assignments));
}

void save_ubm(const Ubm& ubm, const std::string& path) {
  json j;
  j["version"] = "rtnlab-ubm-1";
  j["weights"] = ubm.weights;
  j["means"] = ubm.means;
  j["variances"] = ubm.variances;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

Ubm load_ubm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(path + ": invalid UBM file");
  if (j.value("version", "") != std::string("rtnlab-ubm-1"))
    throw DataError(path + ": unsupported UBM version");
  Ubm ubm;
  try {
    ubm.weights = j.at("weights").get<std::vector<double>>();
    ubm.means = j.at("means").get<std::vector<std::vector<double>>>();
    ubm.variances = j.at("variances").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (ubm.means.size() != ubm.weights.size() ||
      ubm.variances.size() != ubm.weights.size())
    throw DataError(path + ": inconsistent UBM component counts");
  return ubm;
}

void save_tv(const TMatrixModel& tv, const std::string& path) {
  json j;
  j["version"] = "rtnlab-tv-1";
  j["rank"] = tv.rank;
  j["rows"] = tv.rows;
  std::ofstream out(path);
  if (!out) throw DataError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

TMatrixModel load_tv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(path + ": invalid total-variability file");
  if (j.value("version", "") != std::string("rtnlab-tv-1"))
    throw DataError(path + ": unsupported total-variability version");
  TMatrixModel tv;
  try {
    tv.rank = j.at("rank").get<std::size_t>();
    tv.rows = j.at("rows").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  for (const auto& row : tv.rows)
    if (row.size() != tv.rank)
      throw DataError(path + ": row length inconsistent with rank");
  return tv;
}

}  // namespace rtnlab
