#include "gemmed/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gemmed/errors.hpp"

namespace gemmed {

std::string to_string(KernelKind kind) {
  return kind == KernelKind::kRbf ? "rbf" : "linear";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "rbf") return KernelKind::kRbf;
  throw InputError("unknown kernel '" + name + "' (expected linear or rbf)");
}

void KernelSpec::validate() const {
  if (kind == KernelKind::kRbf && !(gamma > 0.0)) {
    throw InputError("rbf kernel requires gamma > 0");
  }
  if (!(jitter >= 0.0)) throw InputError("kernel jitter must be nonnegative");
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& x2) {
  if (x.size() != x2.size()) {
    throw InputError("kernel_eval: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                     std::to_string(x2.size()) + ")");
  }
  switch (spec.kind) {
    case KernelKind::kLinear:
      return x.dot(x2);
    case KernelKind::kRbf:
      return std::exp(-spec.gamma * (x - x2).squaredNorm());
  }
  return 0.0;
}

Eigen::VectorXd kernel_row(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::MatrixXd& xs) {
  if (x.size() != xs.cols()) {
    throw InputError("kernel_row: point has dimension " + std::to_string(x.size()) +
                     ", support has " + std::to_string(xs.cols()));
  }
  Eigen::VectorXd row(xs.rows());
  for (Eigen::Index i = 0; i < xs.rows(); ++i) row[i] = kernel_eval(spec, x, xs.row(i).transpose());
  return row;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& xs) {
  const Eigen::Index n = xs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = kernel_eval(spec, xs.row(i).transpose(), xs.row(j).transpose());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

GramMatrix::GramMatrix(const KernelSpec& spec, const Eigen::MatrixXd& xs) {
  spec.validate();
  if (xs.rows() == 0) throw InputError("gram_matrix: empty point set");
  values_ = kernel_matrix(spec, xs);
  values_.diagonal().array() += spec.jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(values_);
  if (llt.info() != Eigen::Success) {
    throw NumericError("gram_matrix: Cholesky factorization failed with jitter " +
                       std::to_string(spec.jitter) + "; increase the kernel jitter");
  }
  factor_ = llt.matrixL();
}

double median_heuristic_gamma(const Eigen::MatrixXd& xs) {
  const Eigen::Index n = xs.rows();
  if (n < 2) throw InputError("median_heuristic_gamma: need at least two points");
  std::vector<double> sq;
  sq.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) sq.push_back((xs.row(i) - xs.row(j)).squaredNorm());
  }
  const std::size_t mid = (sq.size() - 1) / 2;
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(mid), sq.end());
  double median = sq[mid];
  if (sq.size() % 2 == 0) {
    const double upper = *std::min_element(sq.begin() + static_cast<std::ptrdiff_t>(mid) + 1, sq.end());
    median = 0.5 * (median + upper);
  }
  if (!(median > 0.0)) {
    throw InputError("median_heuristic_gamma: points are (mostly) identical, median distance is zero");
  }
  return 1.0 / median;
}

}  // namespace gemmed
