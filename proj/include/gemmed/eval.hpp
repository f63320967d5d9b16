#pragma once

// Classification and anomaly-ranking metrics. Anomaly scores follow the
// indicator convention: a LOW score (posterior mean of the nominal
// indicator) means anomalous, and a sample is selected when score <= rho.

#include <span>
#include <vector>

namespace gemmed {

double misclassification_error(std::span<const int> predictions, std::span<const int> truth);

struct PrPoint {
  double rho = 0.0;
  double precision = 1.0;
  double recall = 0.0;
};

// Sweeps rho over {0, 1} and every distinct score, ascending. When the
// smallest threshold already selects samples, the curve starts with an
// empty-selection point (precision 1, recall 0) just below it.
std::vector<PrPoint> precision_recall_curve(std::span<const double> eta_scores, const std::vector<bool>& anomaly_truth);

// Trapezoidal area under precision as a function of recall, clamped to [0,1].
double auc(std::vector<PrPoint> curve);

double detection_accuracy(const std::vector<bool>& detections, const std::vector<bool>& anomaly_truth);

}  // namespace gemmed
