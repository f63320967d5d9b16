#pragma once

// Exact posterior quantities for small problems, by enumerating all 2^|T|
// indicator configurations and integrating f analytically. Used as ground
// truth for the Gibbs sampler and the dual gradient.

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "gemmed/trainer.hpp"

namespace gemmed {

inline constexpr std::size_t kOracleMaxSize = 16;

struct OracleResult {
  double log_partition = 0.0;  // log sum_eta p0(eta) exp(w(eta))
  double dual_value = 0.0;
  Expectations expectations;
  std::vector<double> configuration_log_prob;  // indexed by the eta bitmask
};

OracleResult exact_posterior(const DualState& state, const PosteriorModel& model);

struct FiniteDifferenceGradient {
  DualGradient gradient;
  // True for coordinates where a central difference would leave the
  // feasible region and a one-sided difference was used.
  std::vector<bool> lambda_one_sided;
  PerClass<bool> mu_one_sided{};
  PerClass<bool> kappa_one_sided{};
};

using DualFunction = std::function<double(const DualState&)>;

FiniteDifferenceGradient finite_diff(const DualFunction& objective, const DualState& state, double h,
                                     double lambda_cap);

FiniteDifferenceGradient finite_diff_dual(const DualState& state, const PosteriorModel& model, double h,
                                          double lambda_cap);

}  // namespace gemmed
