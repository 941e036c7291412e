// rtnlab/evalmetrics.hpp

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

// Metric suite: binary accuracy / positive-class F1, 7-class accuracy /
// support-weighted F1, sentiment MAE, and per-emotion MAE.

#ifndef RTNLAB_EVALMETRICS_HPP_
#define RTNLAB_EVALMETRICS_HPP_

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtnlab/dataio.hpp"
#include "rtnlab/models.hpp"

namespace rtnlab {

struct MetricsReport {
  double binary_acc = 0.0;
  double binary_f1 = 0.0;
  double acc7 = 0.0;
  double f1_7_weighted = 0.0;
  double sentiment_mae = 0.0;
  std::array<double, kNumEmotions> emotion_mae{};
};

// (accuracy, F1 of the positive class). Any F1 zero-division resolves to 0.
// `true` marks the positive class.
std::pair<double, double> binary_metrics(const std::vector<bool>& pred,
                                         const std::vector<bool>& gold);

// (exact-match accuracy, support-weighted mean of per-class F1) over classes
// 0..6; out-of-range entries are argument errors.
std::pair<double, double> multiclass_metrics(const std::vector<int>& pred,
                                             const std::vector<int>& gold);

double mae(const std::vector<double>& pred, const std::vector<double>& gold);

// Flattens all segments of all videos, discretizes sentiment for the
// classification metrics, and computes per-emotion MAE.
MetricsReport evaluate_model(const Model& model, const Dataset& videos);

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

// Aligned human-readable table (sentiment row plus per-emotion MAE row).
std::string report_table(const MetricsReport& report);

}  // namespace rtnlab

#endif  // RTNLAB_EVALMETRICS_HPP_
