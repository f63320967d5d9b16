#pragma once

// Geometric entropy minimization on bipartite k-NN graphs: per-sample
// distance sums, local entropy estimates, minimal-entropy set selection,
// class thresholds and the leave-one-out detection threshold.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gemmed/dataset.hpp"

namespace gemmed {

struct GemConfig {
  int k = 5;
  double partition_ratio = 0.3;  // fraction of each class used as the reference part
  // Expected nominal fraction of each class. Sets both the ME-set size
  // K_z = round(coverage * |T_z|) and the epigraph level beta_z = coverage * |T_z| / |T|.
  double target_coverage = 0.9;
  double epsilon_gamma = 1e-3;  // slack added to the optimal ME-set cost, raw distance units
  int intrinsic_dim = 0;        // 0 means the ambient feature dimension
  std::uint64_t seed = 0;

  void validate() const;
};

struct BipartitePartition {
  std::vector<std::size_t> target;     // N-part, sorted dataset row indices
  std::vector<std::size_t> reference;  // M-part, sorted dataset row indices
};

struct GemStats {
  // Raw k-NN distance sums. N-part rows are measured against the class
  // reference part; reference rows against the rest of the reference part.
  Eigen::VectorXd distance_sum;
  Eigen::VectorXd normalized_distance;  // distance_sum / |T|
  Eigen::VectorXd local_entropy;        // empty when k < 2
  PerClass<double> gamma_hat{};         // normalized units
  PerClass<double> beta_hat{};
  PerClass<std::size_t> me_set_size{};
  PerClass<BipartitePartition> partition;
  std::size_t total = 0;
};

// Random split of class `label` into target and reference parts.
// |reference| = max(1, floor(ratio * n_z)); both parts are nonempty.
BipartitePartition bipartite_partition(const LabeledDataset& data, int label, double ratio,
                                       std::uint64_t seed);

// Sum of the k smallest Euclidean distances from x to the rows of refs.
double knn_distance_sum(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& refs, int k);

// d*log(dk_sum) - log((k-1)/(M_c * c_d)) with c_d the unit-ball volume in R^d.
// Returns -infinity for dk_sum == 0 (duplicate point).
double local_entropy(double dk_sum, int k, std::size_t reference_size, int dim);

double unit_ball_volume(int dim);

// Indices of the K smallest values (ties to the lower index), ascending.
std::vector<std::size_t> gem_me_set(std::span<const double> d, std::size_t K);

// (sum of the K smallest d + epsilon) / total
double gamma_hat(std::span<const double> d, std::size_t K, double epsilon, std::size_t total);

// Linear-interpolation quantile of the order statistics, p in [0,1].
double empirical_quantile(std::vector<double> values, double p);

// Leave-one-out k-NN scores of each nominal point against the others.
std::vector<double> loo_scores(const Eigen::MatrixXd& nominal, int k);

// (1 - alpha)-quantile of the leave-one-out scores.
double loo_threshold(const Eigen::MatrixXd& nominal, int k, double alpha);

GemStats compute_gem_stats(const LabeledDataset& data, const GemConfig& config);

}  // namespace gemmed
