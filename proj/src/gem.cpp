#include "gemmed/gem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "gemmed/errors.hpp"
#include "gemmed/rng.hpp"

namespace gemmed {

void GemConfig::validate() const {
  if (k < 1) throw ConfigError("gem: k must be >= 1");
  if (!(partition_ratio > 0.0 && partition_ratio < 1.0)) {
    throw ConfigError("gem: partition_ratio must lie in (0,1)");
  }
  if (!(target_coverage > 0.0 && target_coverage <= 1.0)) {
    throw ConfigError("gem: target_coverage must lie in (0,1]");
  }
  if (!(epsilon_gamma >= 0.0)) throw ConfigError("gem: epsilon_gamma must be nonnegative");
  if (intrinsic_dim < 0) throw ConfigError("gem: intrinsic_dim must be >= 0");
}

BipartitePartition bipartite_partition(const LabeledDataset& data, int label, double ratio,
                                       std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("bipartite_partition: ratio must lie in (0,1)");
  std::vector<std::size_t> rows = data.class_indices(label);
  if (rows.size() < 2) {
    throw InputError("bipartite_partition: class " + std::to_string(label) + " has fewer than 2 samples");
  }
  const auto n = rows.size();
  const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n))));
  if (m >= n) throw InputError("bipartite_partition: reference part would leave no target samples");

  Rng rng(derive_seed(seed, streams::kPartition * 16 + class_slot(label)));
  std::shuffle(rows.begin(), rows.end(), rng);
  BipartitePartition part;
  part.reference.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(m));
  part.target.assign(rows.begin() + static_cast<std::ptrdiff_t>(m), rows.end());
  std::sort(part.reference.begin(), part.reference.end());
  std::sort(part.target.begin(), part.target.end());
  return part;
}

double knn_distance_sum(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& refs, int k) {
  if (k < 1) throw InputError("knn_distance_sum: k must be >= 1");
  if (refs.rows() < k) {
    throw InputError("knn_distance_sum: " + std::to_string(refs.rows()) + " reference points for k = " +
                     std::to_string(k));
  }
  if (refs.cols() != x.size()) throw InputError("knn_distance_sum: dimension mismatch");
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(refs.rows()));
  for (Eigen::Index i = 0; i < refs.rows(); ++i) {
    dist[static_cast<std::size_t>(i)] = {(refs.row(i).transpose() - x).norm(), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  double sum = 0.0;
  for (int j = 0; j < k; ++j) sum += dist[static_cast<std::size_t>(j)].first;
  return sum;
}

double unit_ball_volume(int dim) {
  const double d = dim;
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double local_entropy(double dk_sum, int k, std::size_t reference_size, int dim) {
  if (k < 2) throw InputError("local_entropy: k must be >= 2");
  if (dim < 1) throw InputError("local_entropy: dimension must be >= 1");
  if (reference_size == 0) throw InputError("local_entropy: empty reference part");
  if (dk_sum < 0.0) throw InputError("local_entropy: negative distance sum");
  if (dk_sum == 0.0) return -std::numeric_limits<double>::infinity();
  const double scale = (k - 1.0) / (static_cast<double>(reference_size) * unit_ball_volume(dim));
  return dim * std::log(dk_sum) - std::log(scale);
}

std::vector<std::size_t> gem_me_set(std::span<const double> d, std::size_t K) {
  if (K < 1 || K > d.size()) {
    throw InputError("gem_me_set: K = " + std::to_string(K) + " outside [1, " + std::to_string(d.size()) + "]");
  }
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  order.resize(K);
  std::sort(order.begin(), order.end());
  return order;
}

double gamma_hat(std::span<const double> d, std::size_t K, double epsilon, std::size_t total) {
  if (total == 0) throw InputError("gamma_hat: total sample count must be positive");
  double sum = 0.0;
  for (std::size_t i : gem_me_set(d, K)) sum += d[i];
  return (sum + epsilon) / static_cast<double>(total);
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("empirical_quantile: no values");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("empirical_quantile: p must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> loo_scores(const Eigen::MatrixXd& nominal, int k) {
  const Eigen::Index n = nominal.rows();
  if (k < 1 || n < k + 1) {
    throw InputError("loo_threshold: need at least k+1 = " + std::to_string(k + 1) + " nominal points, have " +
                     std::to_string(n));
  }
  std::vector<double> scores(static_cast<std::size_t>(n));
  Eigen::MatrixXd others(n - 1, nominal.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index r = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) others.row(r++) = nominal.row(j);
    }
    scores[static_cast<std::size_t>(i)] = knn_distance_sum(nominal.row(i).transpose(), others, k);
  }
  return scores;
}

double loo_threshold(const Eigen::MatrixXd& nominal, int k, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("loo_threshold: alpha must lie in (0,1)");
  return empirical_quantile(loo_scores(nominal, k), 1.0 - alpha);
}

namespace {

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

}  // namespace

GemStats compute_gem_stats(const LabeledDataset& data, const GemConfig& config) {
  config.validate();
  data.validate_two_class();
  const std::size_t n = data.size();
  const int dim = config.intrinsic_dim > 0 ? config.intrinsic_dim : static_cast<int>(data.dim());
  const int k = config.k;

  GemStats stats;
  stats.total = n;
  stats.distance_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  if (k >= 2) stats.local_entropy = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));

  constexpr double kTiny = std::numeric_limits<double>::epsilon();
  for (std::size_t slot = 0; slot < 2; ++slot) {
    const int label = slot_label(slot);
    BipartitePartition part = bipartite_partition(data, label, config.partition_ratio, config.seed);
    const auto m = part.reference.size();
    if (static_cast<std::size_t>(k) + 1 > m) {
      throw ConfigError("gem: k = " + std::to_string(k) + " needs a reference part of at least k+1 points; class " +
                        std::to_string(label) + " has " + std::to_string(m));
    }
    const Eigen::MatrixXd refs = gather_rows(data.features, part.reference);

    auto record = [&](std::size_t row, double dk, std::size_t ref_size) {
      dk = std::max(dk, kTiny);
      stats.distance_sum[static_cast<Eigen::Index>(row)] = dk;
      if (k >= 2) stats.local_entropy[static_cast<Eigen::Index>(row)] = local_entropy(dk, k, ref_size, dim);
    };
    for (std::size_t row : part.target) {
      record(row, knn_distance_sum(data.features.row(static_cast<Eigen::Index>(row)).transpose(), refs, k), m);
    }
    Eigen::MatrixXd others(static_cast<Eigen::Index>(m - 1), refs.cols());
    for (std::size_t i = 0; i < m; ++i) {
      Eigen::Index r = 0;
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) others.row(r++) = refs.row(static_cast<Eigen::Index>(j));
      }
      record(part.reference[i], knn_distance_sum(refs.row(static_cast<Eigen::Index>(i)).transpose(), others, k), m - 1);
    }

    const std::vector<std::size_t> rows = data.class_indices(label);
    std::vector<double> d;
    d.reserve(rows.size());
    for (std::size_t row : rows) d.push_back(stats.distance_sum[static_cast<Eigen::Index>(row)]);
    const double nz = static_cast<double>(rows.size());
    const std::size_t K = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(config.target_coverage * nz)), 1, rows.size());
    stats.me_set_size[slot] = K;
    stats.gamma_hat[slot] = gamma_hat(d, K, config.epsilon_gamma, n);
    stats.beta_hat[slot] = config.target_coverage * nz / static_cast<double>(n);
    stats.partition[slot] = std::move(part);
  }
  stats.normalized_distance = stats.distance_sum / static_cast<double>(n);
  return stats;
}

}  // namespace gemmed
