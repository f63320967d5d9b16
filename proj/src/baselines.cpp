#include "gemmed/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "gemmed/errors.hpp"

namespace gemmed {

SvmSolution solve_svm_dual(const Eigen::MatrixXd& gram, const std::vector<int>& labels, double C, int max_iter) {
  if (!(C > 0.0)) throw InputError("svm: C must be positive");
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (gram.rows() != n || gram.cols() != n) throw InputError("svm: Gram size does not match labels");
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd q = gram.array() * (y * y.transpose()).array();

  SvmSolution sol;
  sol.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd qa = Eigen::VectorXd::Zero(n);  // Q * alpha

  auto kkt_residual = [&] {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = 1.0 - qa[i];
      double r = std::abs(g);
      if (sol.alpha[i] <= 0.0) r = std::max(g, 0.0);
      else if (sol.alpha[i] >= C) r = std::max(-g, 0.0);
      worst = std::max(worst, r);
    }
    return worst;
  };
  auto objective = [&] { return sol.alpha.sum() - 0.5 * sol.alpha.dot(qa); };

  for (int it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double g = 1.0 - qa[i];
      double next;
      if (q(i, i) > 0.0) next = std::clamp(sol.alpha[i] + g / q(i, i), 0.0, C);
      else next = g > 0.0 ? C : (g < 0.0 ? 0.0 : sol.alpha[i]);
      const double delta = next - sol.alpha[i];
      if (delta != 0.0) {
        sol.alpha[i] = next;
        qa += delta * q.col(i);
      }
    }
    sol.iterations = it + 1;
    sol.objective.push_back(objective());
    sol.kkt_residual = kkt_residual();
    if (sol.kkt_residual < kSvmKktTolerance) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

SvmSolution train_svm_dual(const LabeledDataset& data, const KernelSpec& kernel, const SvmOptions& options) {
  data.validate_two_class();
  kernel.validate();
  return solve_svm_dual(kernel_matrix(kernel, data.features), data.labels, options.C, options.max_iter);
}

TrainedModel train_svm(const LabeledDataset& data, const KernelSpec& kernel, const SvmOptions& options) {
  const SvmSolution sol = train_svm_dual(data, kernel, options);
  TrainedModel model;
  model.kind = ModelKind::kSvm;
  model.kernel = kernel;
  model.support = data.features;
  model.labels = data.labels;
  model.lambda_star = sol.alpha;
  model.eta_hat = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.size()));
  model.hyper = {{"C", options.C},
                 {"max_iter", options.max_iter},
                 {"iterations", sol.iterations},
                 {"converged", sol.converged}};
  return model;
}

TwoStageResult train_two_stage(const LabeledDataset& data, const KernelSpec& kernel, const GemConfig& gem,
                               const SvmOptions& options, double alpha) {
  const GemStats stats = compute_gem_stats(data, gem);
  std::vector<bool> keep(data.size(), false);
  for (std::size_t slot = 0; slot < 2; ++slot) {
    const std::vector<std::size_t> rows = data.class_indices(slot_label(slot));
    std::vector<double> d;
    for (std::size_t r : rows) d.push_back(stats.distance_sum[static_cast<Eigen::Index>(r)]);
    for (std::size_t i : gem_me_set(d, stats.me_set_size[slot])) keep[rows[i]] = true;
  }
  std::vector<std::size_t> survivors;
  TwoStageResult out;
  for (std::size_t r = 0; r < data.size(); ++r) (keep[r] ? survivors : out.removed).push_back(r);
  const LabeledDataset screened = data.subset(survivors);
  if (screened.class_count(+1) == 0 || screened.class_count(-1) == 0) {
    throw InputError("two-stage: screening removed every sample of a class");
  }
  const SvmSolution sol = train_svm_dual(screened, kernel, options);

  TrainedModel& model = out.model;
  model.kind = ModelKind::kTwoStage;
  model.kernel = kernel;
  model.support = data.features;
  model.labels = data.labels;
  model.lambda_star = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.size()));
  model.eta_hat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.size()));
  for (std::size_t j = 0; j < survivors.size(); ++j) {
    model.lambda_star[static_cast<Eigen::Index>(survivors[j])] = sol.alpha[static_cast<Eigen::Index>(j)];
    model.eta_hat[static_cast<Eigen::Index>(survivors[j])] = 1.0;
  }
  model.gamma_hat = stats.gamma_hat;
  model.beta_hat = stats.beta_hat;
  model.k = gem.k;
  model.alpha = alpha;
  model.hyper = {{"C", options.C},
                 {"max_iter", options.max_iter},
                 {"iterations", sol.iterations},
                 {"converged", sol.converged},
                 {"target_coverage", gem.target_coverage},
                 {"removed", out.removed.size()}};
  if (survivors.size() >= static_cast<std::size_t>(gem.k) + 1) {
    model.theta = loo_threshold(screened.features, gem.k, alpha);
  }
  return out;
}

int med_predict(const KernelSpec& kernel, const Eigen::MatrixXd& support, const std::vector<int>& labels,
                const Eigen::VectorXd& lambda, const Eigen::Ref<const Eigen::VectorXd>& x) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < support.rows(); ++i) {
    value += lambda[i] * labels[static_cast<std::size_t>(i)] * kernel_eval(kernel, x, support.row(i).transpose());
  }
  return value >= 0.0 ? +1 : -1;
}

}  // namespace gemmed
