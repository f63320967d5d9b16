#include "gemmed/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gemmed/errors.hpp"

namespace gemmed {

double misclassification_error(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size()) throw InputError("misclassification_error: length mismatch");
  if (predictions.empty()) throw InputError("misclassification_error: empty input");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predictions[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

std::vector<PrPoint> precision_recall_curve(std::span<const double> eta_scores, const std::vector<bool>& anomaly_truth) {
  if (eta_scores.size() != anomaly_truth.size()) throw InputError("precision_recall_curve: length mismatch");
  const auto positives = static_cast<std::size_t>(std::count(anomaly_truth.begin(), anomaly_truth.end(), true));
  if (positives == 0) throw InputError("precision_recall_curve: no true anomalies");

  std::vector<double> thresholds(eta_scores.begin(), eta_scores.end());
  thresholds.push_back(0.0);
  thresholds.push_back(1.0);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<PrPoint> curve;
  curve.reserve(thresholds.size() + 1);
  for (double rho : thresholds) {
    std::size_t selected = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < eta_scores.size(); ++i) {
      if (eta_scores[i] <= rho) {
        ++selected;
        hits += anomaly_truth[i];
      }
    }
    PrPoint p;
    p.rho = rho;
    p.precision = selected == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(selected);
    p.recall = static_cast<double>(hits) / static_cast<double>(positives);
    if (curve.empty() && selected > 0) {
      // Anchor the curve at the empty selection just below the smallest score.
      curve.push_back({std::nextafter(rho, -std::numeric_limits<double>::infinity()), 1.0, 0.0});
    }
    curve.push_back(p);
  }
  return curve;
}

double auc(std::vector<PrPoint> curve) {
  if (curve.size() < 2) throw InputError("auc: need at least two curve points");
  std::stable_sort(curve.begin(), curve.end(), [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].recall - curve[i - 1].recall) * 0.5 * (curve[i].precision + curve[i - 1].precision);
  }
  return std::clamp(area, 0.0, 1.0);
}

double detection_accuracy(const std::vector<bool>& detections, const std::vector<bool>& anomaly_truth) {
  if (detections.size() != anomaly_truth.size()) throw InputError("detection_accuracy: length mismatch");
  if (detections.empty()) throw InputError("detection_accuracy: empty input");
  std::size_t right = 0;
  for (std::size_t i = 0; i < detections.size(); ++i) right += detections[i] == anomaly_truth[i];
  return static_cast<double>(right) / static_cast<double>(detections.size());
}

}  // namespace gemmed
