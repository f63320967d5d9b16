#pragma once

// Two correlated Gaussian classes with ring-shaped anomalies in the training
// set: class means -(3,3) for +1 and (3,3) for -1, shared covariance
// [[20,16],[16,20]], anomalies uniform on the origin-centred annulus
// R <= |x| <= R+1.

#include <cstdint>

#include <Eigen/Dense>

#include "gemmed/dataset.hpp"
#include "gemmed/rng.hpp"

namespace gemmed {

struct RingExperimentConfig {
  double R = 55.0;
  double r_a = 0.2;
  int n_train_per_class = 100;
  int n_test_per_class = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RingExperimentData {
  LabeledDataset train;  // with anomaly flags
  LabeledDataset test;   // clean, anomaly flags all false
};

Eigen::Vector2d class_mean(int label);
Eigen::Matrix2d class_covariance();

// Anomalies per class: round(r_a * n_train_per_class).
int anomalies_per_class(const RingExperimentConfig& config);

RingExperimentData generate(const RingExperimentConfig& config);

// Uniform (by area) draws from the annulus R <= |x| <= R + 1.
Eigen::MatrixXd sample_ring(double R, int count, Rng& rng);

Eigen::MatrixXd sample_class(int label, int count, Rng& rng);

}  // namespace gemmed
