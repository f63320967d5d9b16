#include "gemmed/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gemmed/baselines.hpp"
#include "gemmed/errors.hpp"

namespace gemmed {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double HyperParams::p0() const { return p0_override ? *p0_override : sigmoid(a_eta - 1.0); }

std::vector<std::string> HyperParams::validate() const {
  if (!(c > 0.0)) throw ConfigError("hyper: c must be positive");
  if (!(lambda_cap > 0.0 && lambda_cap < c)) throw ConfigError("hyper: lambda_cap must lie in (0, c)");
  const double p = p0();
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("hyper: indicator prior p0 must lie in (0,1)");
  if (steps < 0) throw ConfigError("hyper: steps must be >= 0");
  if (!(rates.phi > 0.0 && rates.psi > 0.0 && rates.tau > 0.0)) {
    throw ConfigError("hyper: learning rates must be positive");
  }
  if (gibbs.sweeps < 1 || gibbs.inner_draws < 1) throw ConfigError("hyper: Gibbs sweeps and draws must be >= 1");
  if (gibbs.burn_in < 0 || gibbs.burn_in >= gibbs.sweeps) {
    throw ConfigError("hyper: burn_in must lie in [0, sweeps)");
  }
  if (!(svm_c > 0.0)) throw ConfigError("hyper: svm_c must be positive");

  std::vector<std::string> warnings;
  auto check = [&](const char* name, double v, double lo, double hi) {
    if (v < lo || v > hi) {
      std::ostringstream msg;
      msg << "learning rate " << name << " = " << v << " is outside the stable range [" << lo << ", " << hi << "]";
      warnings.push_back(msg.str());
    }
  };
  check("phi", rates.phi, 1e-4, 1e-2);
  check("psi", rates.psi, 1e-3, 1e-1);
  check("tau", rates.tau, 1e-3, 1e-1);
  return warnings;
}

void PosteriorModel::validate() const {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (n == 0) throw InputError("posterior model: no samples");
  if (gram.rows() != n || gram.cols() != n || gram_factor.rows() != n || dn.size() != n || p0.size() != n) {
    throw InputError("posterior model: inconsistent sizes");
  }
  if (!(total > 0.0)) throw InputError("posterior model: total must be positive");
  if (!(c > 0.0)) throw InputError("posterior model: c must be positive");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(p0[i] > 0.0 && p0[i] < 1.0)) throw InputError("posterior model: p0 must lie in (0,1)");
  }
}

PosteriorModel make_posterior_model(const LabeledDataset& data, const GramMatrix& gram, const GemStats& gem,
                                    const HyperParams& hyper) {
  PosteriorModel pm;
  pm.gram = gram.values();
  pm.gram_factor = gram.factor();
  pm.labels = data.labels;
  pm.dn = gem.normalized_distance;
  pm.p0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(data.size()), hyper.p0());
  pm.gamma_hat = gem.gamma_hat;
  pm.beta_hat = gem.beta_hat;
  pm.c = hyper.c;
  pm.total = static_cast<double>(data.size());
  pm.validate();
  return pm;
}

double DualGradient::max_abs() const {
  double m = lambda.size() > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0;
  for (std::size_t s = 0; s < 2; ++s) m = std::max({m, std::abs(mu[s]), std::abs(kappa[s])});
  return m;
}

DualState init_duals(const LabeledDataset& data, const KernelSpec& kernel, const HyperParams& hyper) {
  DualState state;
  const auto n = static_cast<Eigen::Index>(data.size());
  state.lambda = Eigen::VectorXd::Constant(n, hyper.lambda_cap / 2.0);
  try {
    const SvmSolution svm = train_svm_dual(data, kernel, SvmOptions{hyper.svm_c, 10000});
    if (svm.alpha.allFinite()) state.lambda = svm.alpha.cwiseMax(0.0).cwiseMin(hyper.lambda_cap);
  } catch (const std::exception&) {
    // keep the uniform fallback
  }
  return state;
}

Eigen::VectorXd sample_f_given_eta(const DualState& state, const Eigen::Ref<const Eigen::VectorXd>& eta,
                                   const PosteriorModel& model, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(model.size());
  if (model.gram_factor.rows() != n) throw NumericError("sample_f_given_eta: Gram factorization unavailable");
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) weights[i] = state.lambda[i] * eta[i] * model.labels[static_cast<std::size_t>(i)];
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
  return model.gram * weights + model.gram_factor.triangularView<Eigen::Lower>() * z;
}

double eta_conditional(const DualState& state, double f_n, std::size_t n, const PosteriorModel& model) {
  const auto i = static_cast<Eigen::Index>(n);
  const int y = model.labels[n];
  const std::size_t s = class_slot(y);
  return sigmoid(logit(model.p0[i]) + state.lambda[i] * y * f_n - state.mu[s] * model.dn[i] +
                 state.kappa[s] / model.total);
}

namespace {

// Standard error of the mean of an autocorrelated series, using Geyer's
// initial monotone positive sequence estimate of the asymptotic variance.
double mcmc_standard_error(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::Index n = x.size();
  if (n < 2) return 0.0;
  const Eigen::VectorXd centered = x.array() - x.mean();
  auto autocov = [&](Eigen::Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (gamma0 <= 0.0) return 0.0;
  double sigma2 = -gamma0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    double pair = autocov(2 * m) + autocov(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    sigma2 += 2.0 * pair;
    prev_pair = pair;
  }
  sigma2 = std::max(sigma2, gamma0 / static_cast<double>(n));
  return std::sqrt(sigma2 / static_cast<double>(n));
}

}  // namespace

GibbsResult gibbs_expectations(const DualState& state, const PosteriorModel& model, const GibbsSettings& settings,
                               Rng& rng) {
  const std::size_t n = model.size();
  const auto ni = static_cast<Eigen::Index>(n);
  if (settings.sweeps < 1 || settings.inner_draws < 1 || settings.burn_in < 0 ||
      settings.burn_in >= settings.sweeps) {
    throw ConfigError("gibbs: need sweeps >= 1, inner_draws >= 1 and 0 <= burn_in < sweeps");
  }
  // Per-sweep statistics, one row per kept sweep:
  // [margin (n) | weighted distance (2) | retained (2) | eta (n)].
  const Eigen::Index width = 2 * ni + 4;
  const int kept = settings.sweeps - settings.burn_in;
  Eigen::MatrixXd series(kept, width);

  Eigen::VectorXd chain_eta = Eigen::VectorXd::Ones(ni);
  Eigen::VectorXd prob(ni);
  Eigen::VectorXd row(width);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double inv_draws = 1.0 / settings.inner_draws;

  for (int t = 0; t < settings.sweeps; ++t) {
    const Eigen::VectorXd f = sample_f_given_eta(state, chain_eta, model, rng);
    for (std::size_t i = 0; i < n; ++i) prob[static_cast<Eigen::Index>(i)] = eta_conditional(state, f[static_cast<Eigen::Index>(i)], i, model);
    row.setZero();
    for (int r = 0; r < settings.inner_draws; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const bool on = unif(rng) < prob[ii];
        chain_eta[ii] = on ? 1.0 : 0.0;
        if (!on) continue;
        const int y = model.labels[i];
        const auto s = static_cast<Eigen::Index>(class_slot(y));
        row[ii] += y * f[ii];
        row[ni + s] += model.dn[ii];
        row[ni + 2 + s] += 1.0;
        row[ni + 4 + ii] += 1.0;
      }
    }
    // chain_eta now holds the last binary draw, which carries the chain.
    if (t >= settings.burn_in) series.row(t - settings.burn_in) = row * inv_draws;
  }

  GibbsResult result;
  result.kept_sweeps = kept;
  auto unpack = [&](const Eigen::VectorXd& v, Expectations& e) {
    e.margin = v.head(ni);
    for (std::size_t s = 0; s < 2; ++s) {
      e.weighted_distance[s] = v[ni + static_cast<Eigen::Index>(s)];
      e.retained[s] = v[ni + 2 + static_cast<Eigen::Index>(s)];
    }
    e.eta_hat = v.tail(ni);
  };
  const Eigen::VectorXd means = series.colwise().mean();
  Eigen::VectorXd errors(width);
  for (Eigen::Index c = 0; c < width; ++c) errors[c] = mcmc_standard_error(series.col(c));
  unpack(means, result.mean);
  unpack(errors, result.standard_error);
  return result;
}

DualGradient dual_gradient(const DualState& state, const Expectations& expectations, const PosteriorModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  DualGradient g;
  g.lambda.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lam = state.lambda[i];
    if (!(lam < model.c)) {
      throw InvariantError("dual_gradient: lambda[" + std::to_string(i) + "] = " + std::to_string(lam) +
                           " is not below c = " + std::to_string(model.c));
    }
    g.lambda[i] = 1.0 - 1.0 / (model.c - lam) - expectations.margin[i];
  }
  for (std::size_t s = 0; s < 2; ++s) {
    g.mu[s] = -model.gamma_hat[s] + expectations.weighted_distance[s];
    g.kappa[s] = model.beta_hat[s] - expectations.retained[s] / model.total;
  }
  return g;
}

double dual_closed_form_terms(const DualState& state, const PosteriorModel& model) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < state.lambda.size(); ++i) {
    value += state.lambda[i] + std::log1p(-state.lambda[i] / model.c);
  }
  for (std::size_t s = 0; s < 2; ++s) {
    value += -state.mu[s] * model.gamma_hat[s] + model.beta_hat[s] * state.kappa[s];
  }
  return value;
}

double mean_field_dual_estimate(const DualState& state, const Eigen::VectorXd& eta_hat,
                                const PosteriorModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::VectorXd m(n);
  double bound = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = std::clamp(eta_hat[i], 0.0, 1.0);
    const int y = model.labels[static_cast<std::size_t>(i)];
    const std::size_t s = class_slot(y);
    m[i] = state.lambda[i] * q * y;
    bound += 0.5 * model.gram(i, i) * state.lambda[i] * state.lambda[i] * q * (1.0 - q);
    bound += q * (-state.mu[s] * model.dn[i] + state.kappa[s] / model.total);
    bound += q * std::log(model.p0[i]) + (1.0 - q) * std::log1p(-model.p0[i]);
    if (q > 0.0) bound -= q * std::log(q);
    if (q < 1.0) bound -= (1.0 - q) * std::log1p(-q);
  }
  bound += 0.5 * m.dot(model.gram * m);
  return dual_closed_form_terms(state, model) - bound;
}

double projected_ascent_step(DualState& state, const DualGradient& gradient, const HyperParams& hyper,
                             bool update_detection_duals) {
  double residual = 0.0;
  for (Eigen::Index i = 0; i < state.lambda.size(); ++i) {
    const double next = std::clamp(state.lambda[i] + hyper.rates.phi * gradient.lambda[i], 0.0, hyper.lambda_cap);
    residual = std::max(residual, std::abs(next - state.lambda[i]) / hyper.rates.phi);
    state.lambda[i] = next;
  }
  if (!update_detection_duals) return residual;
  for (std::size_t s = 0; s < 2; ++s) {
    const double mu = std::max(state.mu[s] + hyper.rates.psi * gradient.mu[s], 0.0);
    const double kappa = std::max(state.kappa[s] + hyper.rates.tau * gradient.kappa[s], 0.0);
    residual = std::max({residual, std::abs(mu - state.mu[s]) / hyper.rates.psi,
                         std::abs(kappa - state.kappa[s]) / hyper.rates.tau});
    state.mu[s] = mu;
    state.kappa[s] = kappa;
  }
  return residual;
}

namespace {

// eta fixed to one: f | eta is Gaussian with known mean, so every
// expectation is exact.
Expectations frozen_expectations(const DualState& state, const PosteriorModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::VectorXd weights(n);
  for (Eigen::Index i = 0; i < n; ++i) weights[i] = state.lambda[i] * model.labels[static_cast<std::size_t>(i)];
  const Eigen::VectorXd mean = model.gram * weights;
  Expectations e;
  e.margin.resize(n);
  e.eta_hat = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = model.labels[static_cast<std::size_t>(i)];
    const std::size_t s = class_slot(y);
    e.margin[i] = y * mean[i];
    e.weighted_distance[s] += model.dn[i];
    e.retained[s] += 1.0;
  }
  return e;
}

// Kernel-MED dual with all indicators on.
double frozen_dual(const DualState& state, const PosteriorModel& model) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::VectorXd weights(n);
  double value = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    weights[i] = state.lambda[i] * model.labels[static_cast<std::size_t>(i)];
    value += state.lambda[i] + std::log1p(-state.lambda[i] / model.c);
  }
  return value - 0.5 * weights.dot(model.gram * weights);
}

nlohmann::json options_json(const TrainOptions& o) {
  const auto& h = o.hyper;
  return {
      {"c", h.c},
      {"lambda_cap", h.lambda_cap},
      {"a_eta", h.a_eta},
      {"p0", h.p0()},
      {"steps", h.steps},
      {"rates", {h.rates.phi, h.rates.psi, h.rates.tau}},
      {"gibbs", {h.gibbs.sweeps, h.gibbs.inner_draws, h.gibbs.burn_in}},
      {"seed", h.seed},
      {"svm_c", h.svm_c},
      {"early_stop", h.early_stop},
      {"freeze_indicators", h.freeze_indicators},
      {"alpha", o.alpha},
      {"gem",
       {{"k", o.gem.k},
        {"partition_ratio", o.gem.partition_ratio},
        {"target_coverage", o.gem.target_coverage},
        {"epsilon_gamma", o.gem.epsilon_gamma},
        {"intrinsic_dim", o.gem.intrinsic_dim},
        {"seed", o.gem.seed}}},
  };
}

}  // namespace

TrainedModel train(const LabeledDataset& data, const KernelSpec& kernel, const TrainOptions& options) {
  data.validate_two_class();
  kernel.validate();
  const HyperParams& hyper = options.hyper;
  hyper.validate();
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) throw ConfigError("train: alpha must lie in (0,1)");

  const GemStats gem = compute_gem_stats(data, options.gem);
  const GramMatrix gram(kernel, data.features);
  const PosteriorModel pm = make_posterior_model(data, gram, gem, hyper);
  DualState state = init_duals(data, kernel, hyper);
  Rng rng(derive_seed(hyper.seed, streams::kGibbs));

  const bool frozen = hyper.freeze_indicators;
  auto expectations = [&]() {
    return frozen ? frozen_expectations(state, pm) : gibbs_expectations(state, pm, hyper.gibbs, rng).mean;
  };
  auto objective = [&](const Expectations& e) {
    return frozen ? frozen_dual(state, pm) : mean_field_dual_estimate(state, e.eta_hat, pm);
  };

  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(hyper.steps) + 1);
  int calm_steps = 0;
  for (int step = 0; step < hyper.steps; ++step) {
    const Expectations e = expectations();
    const DualGradient g = dual_gradient(state, e, pm);
    trace.push_back(objective(e));
    const double residual = projected_ascent_step(state, g, hyper, !frozen);
    calm_steps = residual < 1e-3 ? calm_steps + 1 : 0;
    if (hyper.early_stop && calm_steps >= 5) break;
  }
  const Expectations final_e = expectations();
  trace.push_back(objective(final_e));

  TrainedModel model;
  model.kind = ModelKind::kGemMed;
  model.kernel = kernel;
  model.support = data.features;
  model.labels = data.labels;
  model.lambda_star = state.lambda;
  model.eta_hat = final_e.eta_hat;
  model.gamma_hat = gem.gamma_hat;
  model.beta_hat = gem.beta_hat;
  model.mu = state.mu;
  model.kappa = state.kappa;
  model.k = options.gem.k;
  model.alpha = options.alpha;
  model.trace = std::move(trace);
  model.hyper = options_json(options);

  const auto nominal = model.nominal_rows();
  if (nominal.size() < static_cast<std::size_t>(model.k) + 1) {
    std::ostringstream msg;
    msg << "training produced " << nominal.size() << " nominal samples (eta_hat > 1/2); the detector needs at least k+1 = "
        << model.k + 1 << ". mean eta_hat = " << model.eta_hat.mean() << ", mu = (" << state.mu[0] << ", "
        << state.mu[1] << "), kappa = (" << state.kappa[0] << ", " << state.kappa[1] << ")";
    throw TrainingError(msg.str());
  }
  model.theta = loo_threshold(model.nominal_points(), model.k, model.alpha);
  return model;
}

}  // namespace gemmed
