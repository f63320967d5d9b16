#pragma once

// Anomaly-blind kernel SVM (no intercept) and the two-stage GEM + SVM
// pipeline used as comparison points.

#include <vector>

#include <Eigen/Dense>

#include "gemmed/dataset.hpp"
#include "gemmed/gem.hpp"
#include "gemmed/kernels.hpp"
#include "gemmed/model.hpp"

namespace gemmed {

struct SvmSolution {
  Eigen::VectorXd alpha;            // dual coefficients in [0, C]
  std::vector<double> objective;    // dual objective after each pass
  int iterations = 0;
  bool converged = false;           // KKT residual below tolerance
  double kkt_residual = 0.0;
};

inline constexpr double kSvmKktTolerance = 1e-3;

// Maximizes sum(alpha) - 1/2 alpha' Q alpha over 0 <= alpha <= C with
// Q = (y y') . K by cyclic exact coordinate ascent. Without an intercept the
// problem has box constraints only.
SvmSolution solve_svm_dual(const Eigen::MatrixXd& gram, const std::vector<int>& labels, double C, int max_iter);

struct SvmOptions {
  double C = 1.0;
  int max_iter = 10000;
};

SvmSolution train_svm_dual(const LabeledDataset& data, const KernelSpec& kernel, const SvmOptions& options);

// Model whose prediction rule is sign(sum_n alpha_n y_n K(x, x_n)); no detector.
TrainedModel train_svm(const LabeledDataset& data, const KernelSpec& kernel, const SvmOptions& options);

struct TwoStageResult {
  TrainedModel model;
  std::vector<std::size_t> removed;  // rows screened out as anomalies
};

// Drops the rows outside each class's GEM minimal-entropy set, then trains
// the SVM on the survivors. Survivors form the model's nominal set.
TwoStageResult train_two_stage(const LabeledDataset& data, const KernelSpec& kernel, const GemConfig& gem,
                               const SvmOptions& options, double alpha = 0.05);

// Prediction rule of kernel MED with all indicators equal to one.
int med_predict(const KernelSpec& kernel, const Eigen::MatrixXd& support, const std::vector<int>& labels,
                const Eigen::VectorXd& lambda, const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace gemmed
