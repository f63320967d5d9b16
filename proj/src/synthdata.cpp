#include "gemmed/synthdata.hpp"

#include <cmath>
#include <numbers>

#include "gemmed/errors.hpp"

namespace gemmed {

void RingExperimentConfig::validate() const {
  if (!(R > 0.0)) throw ConfigError("ring experiment: R must be positive");
  if (!(r_a >= 0.0 && r_a < 1.0)) throw ConfigError("ring experiment: r_a must lie in [0,1)");
  if (n_train_per_class < 1 || n_test_per_class < 1) {
    throw ConfigError("ring experiment: sample counts must be positive");
  }
}

Eigen::Vector2d class_mean(int label) {
  const Eigen::Vector2d m_neg(3.0, 3.0);
  return label > 0 ? Eigen::Vector2d(-m_neg) : m_neg;
}

Eigen::Matrix2d class_covariance() {
  Eigen::Matrix2d sigma;
  sigma << 20.0, 16.0, 16.0, 20.0;
  return sigma;
}

int anomalies_per_class(const RingExperimentConfig& config) {
  return static_cast<int>(std::llround(config.r_a * config.n_train_per_class));
}

Eigen::MatrixXd sample_class(int label, int count, Rng& rng) {
  const Eigen::Matrix2d chol = class_covariance().llt().matrixL();
  const Eigen::Vector2d mean = class_mean(label);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(count, 2);
  for (int i = 0; i < count; ++i) {
    Eigen::Vector2d z;
    z[0] = normal(rng);
    z[1] = normal(rng);
    out.row(i) = (mean + chol * z).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_ring(double R, int count, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double inner2 = R * R;
  const double outer2 = (R + 1.0) * (R + 1.0);
  Eigen::MatrixXd out(count, 2);
  for (int i = 0; i < count; ++i) {
    const double radius = std::sqrt(inner2 + unif(rng) * (outer2 - inner2));
    const double angle = 2.0 * std::numbers::pi * unif(rng);
    out(i, 0) = radius * std::cos(angle);
    out(i, 1) = radius * std::sin(angle);
  }
  return out;
}

RingExperimentData generate(const RingExperimentConfig& config) {
  config.validate();
  const int n = config.n_train_per_class;
  const int n_anom = anomalies_per_class(config);
  const int m = config.n_test_per_class;

  RingExperimentData out;
  Rng train_rng(derive_seed(config.seed, streams::kTrainData));
  out.train.features.resize(2 * n, 2);
  for (int slot = 0; slot < 2; ++slot) {
    // +1 block first, then -1.
    const int label = slot == 0 ? +1 : -1;
    const Eigen::MatrixXd nominal = sample_class(label, n - n_anom, train_rng);
    const Eigen::MatrixXd ring = sample_ring(config.R, n_anom, train_rng);
    const int base = slot * n;
    out.train.features.block(base, 0, n - n_anom, 2) = nominal;
    if (n_anom > 0) out.train.features.block(base + n - n_anom, 0, n_anom, 2) = ring;
    for (int i = 0; i < n; ++i) {
      out.train.labels.push_back(label);
      out.train.anomaly.push_back(i >= n - n_anom);
    }
  }

  Rng test_rng(derive_seed(config.seed, streams::kTestData));
  out.test.features.resize(2 * m, 2);
  out.test.features.topRows(m) = sample_class(+1, m, test_rng);
  out.test.features.bottomRows(m) = sample_class(-1, m, test_rng);
  for (int i = 0; i < 2 * m; ++i) {
    out.test.labels.push_back(i < m ? +1 : -1);
    out.test.anomaly.push_back(false);
  }
  return out;
}

}  // namespace gemmed
