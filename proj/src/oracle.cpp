#include "gemmed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gemmed/errors.hpp"

namespace gemmed {

OracleResult exact_posterior(const DualState& state, const PosteriorModel& model) {
  const std::size_t n = model.size();
  if (n > kOracleMaxSize) {
    throw InputError("exact_posterior: |T| = " + std::to_string(n) + " exceeds the enumeration cap of " +
                     std::to_string(kOracleMaxSize));
  }
  model.validate();
  const auto ni = static_cast<Eigen::Index>(n);
  const std::size_t configs = std::size_t{1} << n;

  // Per-sample linear coefficient of eta_n in the log-weight.
  Eigen::VectorXd linear(ni);
  double log_all_off = 0.0;
  for (Eigen::Index i = 0; i < ni; ++i) {
    const int y = model.labels[static_cast<std::size_t>(i)];
    const std::size_t s = class_slot(y);
    const double p = model.p0[i];
    linear[i] = -state.mu[s] * model.dn[i] + state.kappa[s] / model.total + std::log(p) - std::log1p(-p);
    log_all_off += std::log1p(-p);
  }

  std::vector<double> log_w(configs);
  std::vector<Eigen::VectorXd> mean_f(configs);
  Eigen::VectorXd v(ni);
  for (std::size_t mask = 0; mask < configs; ++mask) {
    double lw = log_all_off;
    for (Eigen::Index i = 0; i < ni; ++i) {
      const bool on = (mask >> i) & 1U;
      v[i] = on ? state.lambda[i] * model.labels[static_cast<std::size_t>(i)] : 0.0;
      if (on) lw += linear[i];
    }
    mean_f[mask] = model.gram * v;
    lw += 0.5 * v.dot(mean_f[mask]);
    log_w[mask] = lw;
  }
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double lw : log_w) total += std::exp(lw - peak);
  const double log_z = peak + std::log(total);

  OracleResult out;
  out.log_partition = log_z;
  out.configuration_log_prob.resize(configs);
  Expectations& e = out.expectations;
  e.margin = Eigen::VectorXd::Zero(ni);
  e.eta_hat = Eigen::VectorXd::Zero(ni);
  for (std::size_t mask = 0; mask < configs; ++mask) {
    const double lp = log_w[mask] - log_z;
    out.configuration_log_prob[mask] = lp;
    const double p = std::exp(lp);
    for (Eigen::Index i = 0; i < ni; ++i) {
      if (!((mask >> i) & 1U)) continue;
      const int y = model.labels[static_cast<std::size_t>(i)];
      const std::size_t s = class_slot(y);
      e.margin[i] += p * y * mean_f[mask][i];
      e.eta_hat[i] += p;
      e.weighted_distance[s] += p * model.dn[i];
      e.retained[s] += p;
    }
  }

  double closed = 0.0;
  for (Eigen::Index i = 0; i < ni; ++i) closed += state.lambda[i] + std::log(1.0 - state.lambda[i] / model.c);
  for (std::size_t s = 0; s < 2; ++s) closed += model.beta_hat[s] * state.kappa[s] - state.mu[s] * model.gamma_hat[s];
  out.dual_value = closed - log_z;
  return out;
}

FiniteDifferenceGradient finite_diff(const DualFunction& objective, const DualState& state, double h,
                                     double lambda_cap) {
  if (!(h > 0.0)) throw InputError("finite_diff: step must be positive");
  FiniteDifferenceGradient out;
  const Eigen::Index n = state.lambda.size();
  out.gradient.lambda.resize(n);
  out.lambda_one_sided.assign(static_cast<std::size_t>(n), false);
  DualState work = state;
  const double base = objective(work);
  constexpr double kUnbounded = std::numeric_limits<double>::infinity();

  // Central difference unless a step of h would leave [lo, hi].
  auto partial = [&](double& coord, double lo, double hi, bool& one_sided) {
    const double x = coord;
    double g = 0.0;
    one_sided = false;
    if (x - h < lo) {
      coord = x + h;
      g = (objective(work) - base) / h;
      one_sided = true;
    } else if (x + h > hi) {
      coord = x - h;
      g = (base - objective(work)) / h;
      one_sided = true;
    } else {
      coord = x + h;
      const double up = objective(work);
      coord = x - h;
      const double down = objective(work);
      g = (up - down) / (2.0 * h);
    }
    coord = x;
    return g;
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    bool flag = false;
    out.gradient.lambda[i] = partial(work.lambda[i], 0.0, lambda_cap, flag);
    out.lambda_one_sided[static_cast<std::size_t>(i)] = flag;
  }
  for (std::size_t s = 0; s < 2; ++s) {
    out.gradient.mu[s] = partial(work.mu[s], 0.0, kUnbounded, out.mu_one_sided[s]);
    out.gradient.kappa[s] = partial(work.kappa[s], 0.0, kUnbounded, out.kappa_one_sided[s]);
  }
  return out;
}

FiniteDifferenceGradient finite_diff_dual(const DualState& state, const PosteriorModel& model, double h,
                                          double lambda_cap) {
  if (model.size() > kOracleMaxSize) throw InputError("finite_diff_dual: problem too large for the oracle");
  return finite_diff([&](const DualState& s) { return exact_posterior(s, model).dual_value; }, state, h,
                     lambda_cap);
}

}  // namespace gemmed
