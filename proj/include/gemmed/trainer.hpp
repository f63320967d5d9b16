#pragma once

// Joint classifier/anomaly-indicator training by projected dual ascent, with
// expectations under the Gibbs posterior over (f, eta) estimated by a blocked
// Gibbs sampler.
//
// Unnormalized log-density over decision values f and indicators eta:
//   -1/2 f'K^-1 f + sum_n eta_n lambda_n y_n f_n - sum_n mu_{y_n} eta_n dn_n
//   + sum_n kappa_{y_n} eta_n / |T| + sum_n log Ber(eta_n; p0_n)
// where dn_n is the k-NN distance sum divided by |T|. The dual objective is
//   D = sum_n [lambda_n + log(1 - lambda_n/c)] - sum_z mu_z gamma_z
//       + sum_z beta_z kappa_z - log Z_eta
// with Z_eta the f-integrated partition function over eta.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gemmed/dataset.hpp"
#include "gemmed/gem.hpp"
#include "gemmed/kernels.hpp"
#include "gemmed/model.hpp"
#include "gemmed/rng.hpp"

namespace gemmed {

double sigmoid(double x);
double logit(double p);

struct LearningRates {
  double phi = 2e-3;  // lambda
  double psi = 2e-2;  // mu
  double tau = 2e-2;  // kappa
};

struct GibbsSettings {
  int sweeps = 30;
  int inner_draws = 20;
  int burn_in = 10;
};

struct HyperParams {
  double c = 10.0;             // slack prior rate
  double lambda_cap = 9.9;     // box bound on lambda, must stay below c
  double a_eta = 5.0;          // indicator prior location: p0 = sigmoid(a_eta - 1) ~ 0.98
  std::optional<double> p0_override;
  int steps = 200;
  LearningRates rates;
  GibbsSettings gibbs;
  std::uint64_t seed = 0;
  double svm_c = 1.0;          // box constraint of the initializing SVM
  bool early_stop = false;     // stop once ||projected gradient||_inf < 1e-3 for 5 steps
  bool freeze_indicators = false;  // eta = 1, mu = kappa = 0: plain kernel MED

  double p0() const;
  // Throws ConfigError on hard violations; returns soft warnings (rates
  // outside their stable ranges).
  std::vector<std::string> validate() const;
};

struct DualState {
  Eigen::VectorXd lambda;
  PerClass<double> mu{};
  PerClass<double> kappa{};
};

// Everything the posterior over (f, eta) depends on besides the duals.
struct PosteriorModel {
  Eigen::MatrixXd gram;        // K (with jitter)
  Eigen::MatrixXd gram_factor; // lower Cholesky factor of gram
  std::vector<int> labels;
  Eigen::VectorXd dn;          // normalized distance sums
  Eigen::VectorXd p0;          // per-sample prior P(eta_n = 1)
  PerClass<double> gamma_hat{};
  PerClass<double> beta_hat{};
  double c = 10.0;
  double total = 0.0;          // |T| normalizer

  std::size_t size() const { return labels.size(); }
  void validate() const;
};

PosteriorModel make_posterior_model(const LabeledDataset& data, const GramMatrix& gram, const GemStats& gem,
                                    const HyperParams& hyper);

struct PosteriorDraw {
  Eigen::VectorXd f;
  std::vector<std::uint8_t> eta;
};

struct Expectations {
  Eigen::VectorXd margin;                // E[eta_n y_n f_n]
  PerClass<double> weighted_distance{};  // E[sum_{n in z} eta_n dn_n]
  PerClass<double> retained{};           // E[sum_{n in z} eta_n]
  Eigen::VectorXd eta_hat;               // E[eta_n]
};

struct GibbsResult {
  Expectations mean;
  // Monte-Carlo standard errors of each entry of `mean`, from the
  // autocorrelation of the per-sweep estimates.
  Expectations standard_error;
  int kept_sweeps = 0;
};

struct DualGradient {
  Eigen::VectorXd lambda;
  PerClass<double> mu{};
  PerClass<double> kappa{};

  double max_abs() const;
};

DualState init_duals(const LabeledDataset& data, const KernelSpec& kernel, const HyperParams& hyper);

// f ~ Normal(K (lambda . eta . y), K) through the cached factor.
Eigen::VectorXd sample_f_given_eta(const DualState& state, const Eigen::Ref<const Eigen::VectorXd>& eta,
                                   const PosteriorModel& model, Rng& rng);

// P(eta_n = 1 | f_n).
double eta_conditional(const DualState& state, double f_n, std::size_t n, const PosteriorModel& model);

GibbsResult gibbs_expectations(const DualState& state, const PosteriorModel& model, const GibbsSettings& settings,
                               Rng& rng);

DualGradient dual_gradient(const DualState& state, const Expectations& expectations, const PosteriorModel& model);

// Closed-form (lambda-only) part of D plus the linear mu/kappa terms; the
// log-partition term is added separately.
double dual_closed_form_terms(const DualState& state, const PosteriorModel& model);

// Mean-field estimate of D using a factorized Bernoulli(eta_hat) surrogate
// for the posterior over eta. Never below the exact dual value.
double mean_field_dual_estimate(const DualState& state, const Eigen::VectorXd& eta_hat,
                                const PosteriorModel& model);

// Projected ascent step; returns the projected-gradient residual (inf-norm).
double projected_ascent_step(DualState& state, const DualGradient& gradient, const HyperParams& hyper,
                             bool update_detection_duals = true);

struct TrainOptions {
  GemConfig gem;
  HyperParams hyper;
  double alpha = 0.05;  // false-alarm level of the test-time detector
};

TrainedModel train(const LabeledDataset& data, const KernelSpec& kernel, const TrainOptions& options);

}  // namespace gemmed
