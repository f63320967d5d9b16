#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "gemmed/errors.hpp"
#include "gemmed/kernels.hpp"
#include "gemmed/rng.hpp"

using namespace gemmed;

TEST_SUITE("kernels") {
  TEST_CASE("linear and rbf values") {
    KernelSpec lin;
    Eigen::Vector2d a(1, 2), b(3, -1);
    CHECK(kernel_eval(lin, a, b) == doctest::Approx(1.0));

    KernelSpec rbf;
    rbf.kind = KernelKind::kRbf;
    rbf.gamma = 1.0;
    Eigen::Vector2d o(0, 0), e(1, 0);
    CHECK(kernel_eval(rbf, o, e) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(kernel_eval(rbf, a, a) == 1.0);
    CHECK(kernel_eval(rbf, a, b) == kernel_eval(rbf, b, a));
  }

  TEST_CASE("dimension mismatch throws") {
    KernelSpec lin;
    Eigen::Vector2d a(1, 2);
    Eigen::Vector3d b(1, 2, 3);
    CHECK_THROWS_AS(kernel_eval(lin, a, b), InputError);
  }

  TEST_CASE("kernel names round-trip") {
    CHECK(kernel_kind_from_string(to_string(KernelKind::kRbf)) == KernelKind::kRbf);
    CHECK(kernel_kind_from_string(to_string(KernelKind::kLinear)) == KernelKind::kLinear);
    CHECK_THROWS(kernel_kind_from_string("poly"));
  }

  TEST_CASE("gram matrix of one rbf point carries the jitter") {
    KernelSpec rbf;
    rbf.kind = KernelKind::kRbf;
    rbf.jitter = 1e-8;
    Eigen::MatrixXd xs(1, 2);
    xs << 0.3, -0.7;
    const GramMatrix g(rbf, xs);
    CHECK(g.values()(0, 0) == 1.0 + 1e-8);
  }

  TEST_CASE("gram matrix is symmetric, PSD and its factor reproduces it") {
    Rng rng(11);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd xs(5, 2);
    for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = n01(rng);
    KernelSpec rbf;
    rbf.kind = KernelKind::kRbf;
    const GramMatrix g(rbf, xs);
    const Eigen::MatrixXd& K = g.values();
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) CHECK(K(i, j) == K(j, i));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 + rbf.jitter);
    const Eigen::MatrixXd back = g.factor() * g.factor().transpose();
    CHECK((back - K).norm() / K.norm() <= 1e-8);
  }

  TEST_CASE("duplicate points under a linear kernel need jitter") {
    KernelSpec lin;
    lin.jitter = 0.0;
    Eigen::MatrixXd xs(3, 2);
    xs << 1, 1, 1, 1, 2, 2;
    CHECK_THROWS_AS(GramMatrix(lin, xs), NumericError);
    lin.jitter = 1e-6;
    CHECK_NOTHROW(GramMatrix(lin, xs));
  }

  TEST_CASE("median heuristic") {
    Eigen::MatrixXd two(2, 1);
    two << 0, 1;
    CHECK(median_heuristic_gamma(two) == doctest::Approx(1.0));

    Eigen::MatrixXd three(3, 1);
    three << 0, 1, 3;
    CHECK(median_heuristic_gamma(three) == doctest::Approx(0.25));

    const double s = 3.0;
    CHECK(median_heuristic_gamma(three * s) == doctest::Approx(0.25 / (s * s)));

    Eigen::MatrixXd same(3, 2);
    same.setConstant(4.0);
    CHECK_THROWS_AS(median_heuristic_gamma(same), InputError);
  }
}
