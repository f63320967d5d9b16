#include "gemmed/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "gemmed/errors.hpp"
#include "gemmed/kernels.hpp"

namespace gemmed {

ValidationInstance random_validation_instance(std::size_t n, std::uint64_t seed) {
  if (n < 2 || n > kOracleMaxSize) throw InputError("validation instances need 2 <= n <= 16");
  Rng rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd xs(ni, 2);
  for (Eigen::Index i = 0; i < ni; ++i) xs.row(i) << between(-2, 2), between(-2, 2);
  KernelSpec spec;
  spec.kind = KernelKind::kRbf;
  spec.gamma = 1.0;
  const GramMatrix gram(spec, xs);

  ValidationInstance v;
  PosteriorModel& m = v.model;
  m.gram = gram.values();
  m.gram_factor = gram.factor();
  m.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.labels[i] = i % 2 == 0 ? 1 : -1;
  m.total = static_cast<double>(n);
  m.dn.resize(ni);
  m.p0.resize(ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    m.dn[i] = between(0.0, 2.0) / m.total;
    m.p0[i] = between(0.2, 0.8);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    m.gamma_hat[s] = between(0.0, 0.5);
    m.beta_hat[s] = between(0.1, 0.5);
  }
  m.c = 10.0;
  m.validate();

  v.lambda_cap = 0.99 * m.c;
  v.state.lambda.resize(ni);
  for (Eigen::Index i = 0; i < ni; ++i) v.state.lambda[i] = between(0.1, 2.0);
  for (std::size_t s = 0; s < 2; ++s) {
    v.state.mu[s] = between(0.1, 3.0);
    v.state.kappa[s] = between(0.1, 3.0);
  }
  return v;
}

double gradient_check(const ValidationInstance& instance, double h) {
  const OracleResult exact = exact_posterior(instance.state, instance.model);
  const DualGradient analytic = dual_gradient(instance.state, exact.expectations, instance.model);
  const FiniteDifferenceGradient numeric = finite_diff_dual(instance.state, instance.model, h, instance.lambda_cap);
  double worst = 0.0;
  auto compare = [&](double a, double b) {
    worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}));
  };
  for (Eigen::Index i = 0; i < analytic.lambda.size(); ++i) compare(analytic.lambda[i], numeric.gradient.lambda[i]);
  for (std::size_t s = 0; s < 2; ++s) {
    compare(analytic.mu[s], numeric.gradient.mu[s]);
    compare(analytic.kappa[s], numeric.gradient.kappa[s]);
  }
  return worst;
}

SamplerCheck sampler_check(const ValidationInstance& instance, const GibbsSettings& settings, std::uint64_t seed) {
  const OracleResult exact = exact_posterior(instance.state, instance.model);
  Rng rng(seed);
  const GibbsResult gibbs = gibbs_expectations(instance.state, instance.model, settings, rng);

  SamplerCheck check;
  auto compare = [&](double estimate, double se, double truth) {
    ++check.statistics;
    const double gap = std::abs(estimate - truth);
    const double z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    check.max_z = std::max(check.max_z, z);
    if (z <= 3.0) ++check.within;
  };
  const Expectations& g = gibbs.mean;
  const Expectations& se = gibbs.standard_error;
  const Expectations& t = exact.expectations;
  for (Eigen::Index i = 0; i < t.margin.size(); ++i) {
    compare(g.margin[i], se.margin[i], t.margin[i]);
    compare(g.eta_hat[i], se.eta_hat[i], t.eta_hat[i]);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    compare(g.weighted_distance[s], se.weighted_distance[s], t.weighted_distance[s]);
    compare(g.retained[s], se.retained[s], t.retained[s]);
  }
  return check;
}

}  // namespace gemmed
