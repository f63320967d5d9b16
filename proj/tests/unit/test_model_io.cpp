#include <doctest.h>

#include <filesystem>

#include "gemmed/errors.hpp"
#include "gemmed/experiment.hpp"
#include "gemmed/model.hpp"

using namespace gemmed;

namespace {

TrainedModel small_trained_model() {
  ExperimentSettings s = ring_experiment_settings();
  s.n_train_per_class = 30;
  s.n_test_per_class = 50;
  s.train.hyper.steps = 20;
  return run_cell(Method::kGemMed, 55.0, 0.2, 3, s).model;
}

}  // namespace

TEST_SUITE("model_io") {
  TEST_CASE("json round-trip predicts bit-exactly") {
    const TrainedModel m = small_trained_model();
    const auto path = std::filesystem::temp_directory_path() / "gemmed_model_roundtrip.json";
    save_model(path.string(), m);
    const TrainedModel back = load_model(path.string());
    std::filesystem::remove(path);

    CHECK(back.lambda_star == m.lambda_star);
    CHECK(back.eta_hat == m.eta_hat);
    CHECK(back.support == m.support);
    CHECK(back.theta == m.theta);
    CHECK(back.trace == m.trace);
    Eigen::MatrixXd grid(121, 2);
    for (int i = 0; i < 11; ++i)
      for (int j = 0; j < 11; ++j) grid.row(11 * i + j) << -15.0 + 3.0 * i, -15.0 + 3.0 * j;
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
      const Eigen::VectorXd x = grid.row(r).transpose();
      CHECK(decision_value(back, x) == decision_value(m, x));
      CHECK(anomaly_score(back, x) == anomaly_score(m, x));
    }
  }

  TEST_CASE("schema problems are reported") {
    nlohmann::json doc = model_to_json(small_trained_model());
    doc["format_version"] = 99;
    CHECK_THROWS_AS(model_from_json(doc), InputError);
    doc = model_to_json(small_trained_model());
    doc.erase("lambda_star");
    CHECK_THROWS_AS(model_from_json(doc), InputError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), InputError);
  }

  TEST_CASE("prediction tie-break and single support point") {
    TrainedModel m;
    m.kernel.kind = KernelKind::kRbf;
    m.support = Eigen::MatrixXd::Zero(1, 2);
    m.labels = {1};
    m.lambda_star = Eigen::VectorXd::Zero(1);
    m.eta_hat = Eigen::VectorXd::Ones(1);
    CHECK(predict(m, Eigen::Vector2d(4, 4)) == 1);
    m.labels = {-1};
    CHECK(predict(m, Eigen::Vector2d(4, 4)) == 1);
    m.labels = {1};
    m.lambda_star[0] = 0.7;
    for (double t : {-30.0, 0.0, 2.0, 50.0}) CHECK(predict(m, Eigen::Vector2d(t, -t)) == 1);
  }

  TEST_CASE("detector on training points") {
    TrainedModel m;
    m.support.resize(4, 1);
    m.support << 0, 1, 2, 10;
    m.labels = {1, 1, -1, -1};
    m.lambda_star = Eigen::VectorXd::Ones(4);
    m.eta_hat = Eigen::Vector4d(1.0, 0.9, 0.8, 0.1);
    m.k = 1;
    m.theta = 1.0;
    Eigen::VectorXd x(1);
    x << 1;
    CHECK(anomaly_score(m, x) == 0.0);
    CHECK(detect(m, x) == Detection::kNominal);
    x << 10;
    CHECK(anomaly_score(m, x) == doctest::Approx(8.0));
    CHECK(detect(m, x) == Detection::kAnomaly);

    m.k = 4;
    CHECK_THROWS_AS(anomaly_score(m, x), ConfigError);
    m.k = 1;
    m.theta.reset();
    CHECK_THROWS_AS(detect(m, x), ConfigError);
  }
}
