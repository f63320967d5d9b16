#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gemmed/errors.hpp"
#include "gemmed/gem.hpp"
#include "gemmed/rng.hpp"

using namespace gemmed;

namespace {

LabeledDataset line_dataset(int per_class) {
  LabeledDataset d;
  d.features.resize(2 * per_class, 1);
  for (int i = 0; i < 2 * per_class; ++i) {
    d.features(i, 0) = i;
    d.labels.push_back(i < per_class ? 1 : -1);
  }
  return d;
}

}  // namespace

TEST_SUITE("gem") {
  TEST_CASE("bipartite partition sizes and determinism") {
    const LabeledDataset d = line_dataset(10);
    const auto p = bipartite_partition(d, 1, 0.5, 3);
    CHECK(p.target.size() == 5);
    CHECK(p.reference.size() == 5);
    std::vector<std::size_t> all = p.target;
    all.insert(all.end(), p.reference.begin(), p.reference.end());
    std::sort(all.begin(), all.end());
    CHECK(all == d.class_indices(1));
    const auto again = bipartite_partition(d, 1, 0.5, 3);
    CHECK(again.reference == p.reference);

    const LabeledDataset big = line_dataset(100);
    CHECK(bipartite_partition(big, -1, 0.3, 1).reference.size() == 30);

    const LabeledDataset tiny = line_dataset(1);
    CHECK_THROWS_AS(bipartite_partition(tiny, 1, 0.5, 1), InputError);
  }

  TEST_CASE("knn distance sums") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd refs(3, 1);
    refs << 1, -2, 3;
    CHECK(knn_distance_sum(x, refs, 2) == doctest::Approx(3.0));
    Eigen::MatrixXd five(1, 1);
    five << 5;
    CHECK(knn_distance_sum(x, five, 1) == doctest::Approx(5.0));
    refs << 1, -1, 2;
    CHECK(knn_distance_sum(x, refs, 2) == doctest::Approx(2.0));
    CHECK_THROWS_AS(knn_distance_sum(x, five, 2), InputError);
  }

  TEST_CASE("local entropy") {
    CHECK(local_entropy(1.0, 2, 4, 1) == doctest::Approx(std::log(8.0)).epsilon(1e-14));
    // (k-1)/(M c_d) = 1 with k = 3, d = 1 (c_d = 2), M = 1.
    CHECK(local_entropy(1.0, 3, 1, 1) == doctest::Approx(0.0));
    CHECK(local_entropy(2.0, 5, 10, 2) > local_entropy(1.5, 5, 10, 2));
    CHECK(std::isinf(local_entropy(0.0, 2, 4, 1)));
    CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
  }

  TEST_CASE("minimal entropy set") {
    const std::vector<double> d{5, 1, 3};
    CHECK(gem_me_set(d, 2) == std::vector<std::size_t>{1, 2});
    CHECK(gem_me_set(d, 3) == std::vector<std::size_t>{0, 1, 2});
    CHECK(gem_me_set(d, 1) == std::vector<std::size_t>{1});
    const std::vector<double> tied{2, 1, 1, 1};
    CHECK(gem_me_set(tied, 2) == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(gem_me_set(d, 0), InputError);
    CHECK_THROWS_AS(gem_me_set(d, 4), InputError);
  }

  TEST_CASE("minimal entropy set is equivariant under permutation") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> d(9);
    for (auto& v : d) v = u(rng);
    std::vector<std::size_t> perm(d.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> shuffled(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) shuffled[i] = d[perm[i]];
    auto chosen = gem_me_set(d, 4);
    std::vector<std::size_t> mapped;
    for (std::size_t i : gem_me_set(shuffled, 4)) mapped.push_back(perm[i]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == chosen);
  }

  TEST_CASE("entropy level") {
    const std::vector<double> d{5, 1, 3};
    CHECK(gamma_hat(d, 2, 0.1, 10) == doctest::Approx(0.41));
    CHECK(gamma_hat(d, 3, 0.0, 3) == doctest::Approx(3.0));
    const std::vector<double> flat{2, 2, 2, 2};
    CHECK(gamma_hat(flat, 3, 0.5, 8) == doctest::Approx((6.0 + 0.5) / 8.0));
  }

  TEST_CASE("quantile and leave-one-out threshold") {
    CHECK(empirical_quantile({1, 2, 3, 4}, 0.75) == doctest::Approx(3.25));
    CHECK(empirical_quantile({4, 1, 3, 2}, 1.0) == doctest::Approx(4.0));
    CHECK(empirical_quantile({4, 1, 3, 2}, 0.0) == doctest::Approx(1.0));

    // Equally spaced points on a circle: every leave-one-out score is equal.
    Eigen::MatrixXd ring(8, 2);
    for (int i = 0; i < 8; ++i) ring.row(i) << std::cos(i * M_PI / 4), std::sin(i * M_PI / 4);
    const auto scores = loo_scores(ring, 2);
    for (double s : scores) CHECK(s == doctest::Approx(scores[0]));
    CHECK(loo_threshold(ring, 2, 0.3) == doctest::Approx(scores[0]));

    Rng rng(9);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd pts(30, 2);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = n01(rng);
    const auto all = loo_scores(pts, 3);
    CHECK(loo_threshold(pts, 3, 1e-12) == doctest::Approx(*std::max_element(all.begin(), all.end())));
    double prev = loo_threshold(pts, 3, 0.01);
    for (double alpha : {0.05, 0.1, 0.2, 0.5, 0.9}) {
      const double t = loo_threshold(pts, 3, alpha);
      CHECK(t <= prev);
      prev = t;
    }
    CHECK_THROWS_AS(loo_threshold(pts.topRows(3), 3, 0.1), InputError);
  }

  TEST_CASE("far anomalies get larger distance sums than every nominal") {
    Rng rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    LabeledDataset d;
    const int nominal = 40, anomalies = 5;
    d.features.resize(nominal + anomalies, 2);
    for (int i = 0; i < nominal; ++i) d.features.row(i) << u(rng), u(rng);
    for (int i = 0; i < anomalies; ++i) {
      const double a = 2 * M_PI * i / anomalies;
      d.features.row(nominal + i) << 50 * std::cos(a), 50 * std::sin(a);
    }
    d.labels.assign(nominal + anomalies, 1);
    // a second class so the stats are defined for both labels
    LabeledDataset both = d;
    both.features.conservativeResize(2 * (nominal + anomalies), 2);
    both.features.bottomRows(nominal + anomalies) = d.features.array() + 200.0;
    both.labels.resize(2 * (nominal + anomalies), -1);
    GemConfig cfg;
    cfg.seed = 4;
    const GemStats s = compute_gem_stats(both, cfg);
    double max_nominal = 0, min_anomaly = 1e300;
    for (int i = 0; i < nominal + anomalies; ++i) {
      if (i < nominal) max_nominal = std::max(max_nominal, s.distance_sum[i]);
      else min_anomaly = std::min(min_anomaly, s.distance_sum[i]);
    }
    CHECK(min_anomaly > max_nominal);
    CHECK(s.normalized_distance[0] == doctest::Approx(s.distance_sum[0] / both.size()));
  }

  TEST_CASE("class statistics follow the coverage rule") {
    const LabeledDataset d = line_dataset(20);
    GemConfig cfg;
    cfg.k = 2;
    cfg.target_coverage = 0.8;
    const GemStats s = compute_gem_stats(d, cfg);
    for (std::size_t z = 0; z < 2; ++z) {
      CHECK(s.me_set_size[z] == 16);
      CHECK(s.beta_hat[z] == doctest::Approx(0.8 * 20 / 40));
    }
    CHECK(s.local_entropy.size() == 40);
  }
}
