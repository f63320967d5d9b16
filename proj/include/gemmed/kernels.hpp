#pragma once

#include <string>

#include <Eigen/Dense>

namespace gemmed {

enum class KernelKind { kLinear, kRbf };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);

inline constexpr double kDefaultJitter = 1e-8;

struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double gamma = 1.0;  // rbf bandwidth, 1/distance^2
  double jitter = kDefaultJitter;

  // Throws InputError if gamma <= 0 for rbf or jitter < 0.
  void validate() const;
};

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2);

// Cross-kernel row k(x, xs[i]) for every row of xs.
Eigen::VectorXd kernel_row(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::MatrixXd& xs);

// Plain kernel matrix [K(xs_i, xs_j)] without jitter.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& xs);

// Prior covariance over the training points: K + jitter*I with its Cholesky
// factor. Immutable after construction.
class GramMatrix {
 public:
  // Throws NumericError if the jittered matrix is not positive definite.
  GramMatrix(const KernelSpec& spec, const Eigen::MatrixXd& xs);

  const Eigen::MatrixXd& values() const { return values_; }
  // Lower-triangular L with L*L^T == values().
  const Eigen::MatrixXd& factor() const { return factor_; }
  Eigen::Index size() const { return values_.rows(); }

 private:
  Eigen::MatrixXd values_;
  Eigen::MatrixXd factor_;
};

// 1 / median of squared pairwise distances.
double median_heuristic_gamma(const Eigen::MatrixXd& xs);

}  // namespace gemmed
