#include <doctest.h>

#include <cmath>

#include "gemmed/errors.hpp"
#include "gemmed/oracle.hpp"
#include "gemmed/validation.hpp"

using namespace gemmed;

namespace {

PosteriorModel identity_model(std::size_t n, double p0) {
  PosteriorModel m;
  const auto ni = static_cast<Eigen::Index>(n);
  m.gram = Eigen::MatrixXd::Identity(ni, ni);
  m.gram_factor = m.gram;
  for (std::size_t i = 0; i < n; ++i) m.labels.push_back(i % 2 == 0 ? 1 : -1);
  m.dn = Eigen::VectorXd::Zero(ni);
  m.p0 = Eigen::VectorXd::Constant(ni, p0);
  m.gamma_hat = {0.1, 0.1};
  m.beta_hat = {0.25, 0.25};
  m.c = 10.0;
  m.total = static_cast<double>(n);
  return m;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("single sample with zero lambda") {
    PosteriorModel m = identity_model(1, 0.3);
    DualState s;
    s.lambda = Eigen::VectorXd::Zero(1);
    const OracleResult r = exact_posterior(s, m);
    CHECK(r.expectations.eta_hat[0] == doctest::Approx(0.3));
    CHECK(std::exp(r.configuration_log_prob[0]) == doctest::Approx(0.7));
    CHECK(r.expectations.margin[0] == doctest::Approx(0.0));
    CHECK(r.log_partition == doctest::Approx(0.0).epsilon(1e-14));
  }

  TEST_CASE("single sample log partition in closed form") {
    PosteriorModel m = identity_model(1, 0.4);
    m.gram(0, 0) = 2.0;
    m.gram_factor(0, 0) = std::sqrt(2.0);
    m.dn[0] = 0.5;
    DualState s;
    s.lambda = Eigen::VectorXd::Constant(1, 1.5);
    s.mu = {0.0, 0.8};
    s.kappa = {0.0, 0.6};
    const OracleResult r = exact_posterior(s, m);
    const double on = 0.4 * std::exp(0.5 * 1.5 * 1.5 * 2.0 - 0.8 * 0.5 + 0.6 / 1.0);
    CHECK(r.log_partition == doctest::Approx(std::log(0.6 + on)));
    const double expected_dual = 1.5 + std::log(1.0 - 1.5 / 10.0) - 0.8 * 0.1 + 0.25 * 0.6 - std::log(0.6 + on);
    CHECK(r.dual_value == doctest::Approx(expected_dual));
    // E[eta y f] = P(eta = 1) * y * (K lambda y)
    CHECK(r.expectations.margin[0] == doctest::Approx(on / (0.6 + on) * 1.5 * 2.0));
  }

  TEST_CASE("two-sample hand enumeration") {
    PosteriorModel m = identity_model(2, 0.5);
    DualState s;
    s.lambda = Eigen::Vector2d(1.0, 1.0);
    const OracleResult r = exact_posterior(s, m);
    const double expected = std::exp(0.5) / (std::exp(0.5) + 1.0);
    CHECK(r.expectations.eta_hat[0] == doctest::Approx(expected));
    CHECK(r.expectations.eta_hat[1] == doctest::Approx(expected));
    CHECK(r.expectations.eta_hat[0] == doctest::Approx(0.6225).epsilon(1e-4));
  }

  TEST_CASE("size cap") {
    PosteriorModel m = identity_model(17, 0.5);
    DualState s;
    s.lambda = Eigen::VectorXd::Zero(17);
    CHECK_THROWS(exact_posterior(s, m));
  }

  TEST_CASE("dual falls linearly in the entropy level") {
    ValidationInstance v = random_validation_instance(5, 2);
    const double before = exact_posterior(v.state, v.model).dual_value;
    v.model.gamma_hat[1] += 0.25;
    const double after = exact_posterior(v.state, v.model).dual_value;
    CHECK(after - before == doctest::Approx(-0.25 * v.state.mu[1]));
  }

  TEST_CASE("finite differences of a quadratic") {
    DualState s;
    s.lambda = Eigen::Vector2d(0.5, 3.0);
    s.mu = {1.0, 2.0};
    s.kappa = {0.5, 0.0};
    auto f = [](const DualState& x) {
      return x.lambda.squaredNorm() + 3.0 * x.mu[0] * x.mu[1] - x.kappa[0] * x.kappa[0] + 2.0 * x.kappa[1];
    };
    const FiniteDifferenceGradient g = finite_diff(f, s, 1e-4, 9.9);
    CHECK(g.gradient.lambda[0] == doctest::Approx(1.0));
    CHECK(g.gradient.lambda[1] == doctest::Approx(6.0));
    CHECK(g.gradient.mu[0] == doctest::Approx(6.0));
    CHECK(g.gradient.mu[1] == doctest::Approx(3.0));
    CHECK(g.gradient.kappa[0] == doctest::Approx(-1.0));
    CHECK(g.gradient.kappa[1] == doctest::Approx(2.0));
    CHECK(g.kappa_one_sided[1]);
    CHECK_FALSE(g.kappa_one_sided[0]);
  }

  TEST_CASE("gradient matches finite differences on a random instance") {
    CHECK(gradient_check(random_validation_instance(6, 77)) <= 1e-5);
  }
}
