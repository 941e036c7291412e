// core/src/evalmetrics.cc

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

#include "rtnlab/evalmetrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rtnlab/errors.hpp"
#include "rtnlab/log.hpp"

namespace rtnlab {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* who) {
  if (a != b)
    throw ArgumentError(std::string(who) + ": " + std::to_string(a) +
                        " predictions vs " + std::to_string(b) + " golds");
  if (a == 0) throw ArgumentError(std::string(who) + ": empty input");
}

// F1 with the zero-division rule: no predicted positives and no gold
// positives -> 0 (logged once per evaluation by the callers' policy).
double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn,
                      bool* divided_by_zero) {
  const std::size_t denom = 2 * tp + fp + fn;
  if (denom == 0) {
    if (divided_by_zero) *divided_by_zero = true;
    return 0.0;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

std::pair<double, double> binary_metrics(const std::vector<bool>& pred,
                                         const std::vector<bool>& gold) {
  check_aligned(pred.size(), gold.size(), "binary_metrics");
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    correct += pred[i] == gold[i];
    tp += pred[i] && gold[i];
    fp += pred[i] && !gold[i];
    fn += !pred[i] && gold[i];
  }
  bool zero_div = false;
  const double f1 = f1_from_counts(tp, fp, fn, &zero_div);
  if (zero_div)
    log_note("binary_metrics: no positive predictions or golds; F1 = 0");
  return {static_cast<double>(correct) / static_cast<double>(pred.size()), f1};
}

std::pair<double, double> multiclass_metrics(const std::vector<int>& pred,
                                             const std::vector<int>& gold) {
  check_aligned(pred.size(), gold.size(), "multiclass_metrics");
  constexpr int kClasses = 7;
  for (int v : pred)
    if (v < 0 || v >= kClasses)
      throw ArgumentError("multiclass_metrics: predicted class " +
                          std::to_string(v) + " outside 0..6");
  for (int v : gold)
    if (v < 0 || v >= kClasses)
      throw ArgumentError("multiclass_metrics: gold class " +
                          std::to_string(v) + " outside 0..6");

  std::size_t correct = 0;
  std::array<std::size_t, kClasses> tp{}, fp{}, fn{}, support{};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    correct += pred[i] == gold[i];
    ++support[gold[i]];
    if (pred[i] == gold[i]) {
      ++tp[gold[i]];
    } else {
      ++fp[pred[i]];
      ++fn[gold[i]];
    }
  }
  bool zero_div = false;
  double weighted_f1 = 0.0;
  for (int k = 0; k < kClasses; ++k)
    weighted_f1 += static_cast<double>(support[k]) /
                   static_cast<double>(pred.size()) *
                   f1_from_counts(tp[k], fp[k], fn[k], &zero_div);
  if (zero_div)
    log_note("multiclass_metrics: some class had no members on either side; "
             "its F1 = 0");
  return {static_cast<double>(correct) / static_cast<double>(pred.size()),
          weighted_f1};
}

double mae(const std::vector<double>& pred, const std::vector<double>& gold) {
  check_aligned(pred.size(), gold.size(), "mae");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    total += std::abs(pred[i] - gold[i]);
  return total / static_cast<double>(pred.size());
}

MetricsReport evaluate_model(const Model& model, const Dataset& videos) {
  std::vector<bool> pred_bin, gold_bin;
  std::vector<int> pred_cls, gold_cls;
  std::vector<double> pred_sent, gold_sent;
  std::array<std::vector<double>, kNumEmotions> pred_emo, gold_emo;

  for (const VideoSequence& video : videos) {
    const std::vector<Prediction> preds = forward(model, video);
    for (std::size_t t = 0; t < video.segments.size(); ++t) {
      const SegmentRecord& rec = video.segments[t];
      const auto [p_pos, p_cls] = discretize_sentiment(preds[t].sentiment);
      const auto [g_pos, g_cls] = discretize_sentiment(rec.sentiment);
      pred_bin.push_back(p_pos);
      gold_bin.push_back(g_pos);
      pred_cls.push_back(p_cls);
      gold_cls.push_back(g_cls);
      pred_sent.push_back(preds[t].sentiment);
      gold_sent.push_back(rec.sentiment);
      for (std::size_t e = 0; e < kNumEmotions; ++e) {
        pred_emo[e].push_back(preds[t].emotions[e]);
        gold_emo[e].push_back(rec.emotions[e]);
      }
    }
  }
  if (pred_sent.empty())
    throw ArgumentError("evaluate_model: empty dataset");

  MetricsReport report;
  std::tie(report.binary_acc, report.binary_f1) =
      binary_metrics(pred_bin, gold_bin);
  std::tie(report.acc7, report.f1_7_weighted) =
      multiclass_metrics(pred_cls, gold_cls);
  report.sentiment_mae = mae(pred_sent, gold_sent);
  for (std::size_t e = 0; e < kNumEmotions; ++e)
    report.emotion_mae[e] = mae(pred_emo[e], gold_emo[e]);
  return report;
}

nlohmann::json report_to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["binary_acc"] = report.binary_acc;
  j["binary_f1"] = report.binary_f1;
  j["acc7"] = report.acc7;
  j["f1_7_weighted"] = report.f1_7_weighted;
  j["sentiment_mae"] = report.sentiment_mae;
  nlohmann::json emo;
  for (std::size_t e = 0; e < kNumEmotions; ++e)
    emo[kEmotionNames[e]] = report.emotion_mae[e];
  j["emotion_mae"] = emo;
  return j;
}

MetricsReport report_from_json(const nlohmann::json& j) {
  MetricsReport report;
  try {
    report.binary_acc = j.at("binary_acc").get<double>();
    report.binary_f1 = j.at("binary_f1").get<double>();
    report.acc7 = j.at("acc7").get<double>();
    report.f1_7_weighted = j.at("f1_7_weighted").get<double>();
    report.sentiment_mae = j.at("sentiment_mae").get<double>();
    for (std::size_t e = 0; e < kNumEmotions; ++e)
      report.emotion_mae[e] =
          j.at("emotion_mae").at(kEmotionNames[e]).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metrics report: ") + e.what());
  }
  return report;
}

std::string report_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s %8s\n", "",
                "BinAcc", "BinF1", "Acc7", "F1w", "MAE");
  out << line;
  std::snprintf(line, sizeof(line), "%-12s %8.4f %8.4f %8.4f %8.4f %8.4f\n",
                "sentiment", report.binary_acc, report.binary_f1, report.acc7,
                report.f1_7_weighted, report.sentiment_mae);
  out << line;
  out << "emotion MAE:";
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    std::snprintf(line, sizeof(line), " %s=%.4f", kEmotionNames[e],
                  report.emotion_mae[e]);
    out << line;
  }
  out << "\n";
  return out.str();
}

}  // namespace rtnlab
