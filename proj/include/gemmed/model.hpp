#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gemmed/dataset.hpp"
#include "gemmed/kernels.hpp"

namespace gemmed {

enum class ModelKind { kGemMed, kSvm, kTwoStage };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

enum class Detection { kNominal, kAnomaly };

// A fitted kernel expansion f(x) = sum_n eta_n * lambda_n * y_n * K(x, x_n)
// together with the nominal set {eta_n > 1/2} used for test-time detection.
// Shared by GEM-MED and the baselines (for which eta is 0/1).
struct TrainedModel {
  ModelKind kind = ModelKind::kGemMed;
  KernelSpec kernel;
  Eigen::MatrixXd support;
  std::vector<int> labels;
  Eigen::VectorXd lambda_star;
  Eigen::VectorXd eta_hat;
  PerClass<double> gamma_hat{};
  PerClass<double> beta_hat{};
  PerClass<double> mu{};
  PerClass<double> kappa{};
  int k = 5;
  double alpha = 0.05;
  std::optional<double> theta;  // absent when the model has no detector
  std::vector<double> trace;    // per-step dual objective estimates
  nlohmann::json hyper = nlohmann::json::object();

  std::vector<std::size_t> nominal_rows() const;
  Eigen::MatrixXd nominal_points() const;
  void validate() const;
};

// Decision value sum_n eta_n lambda_n y_n K(x, x_n).
double decision_value(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

// Sign of the decision value; an exact zero maps to +1.
int predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<int> predict_all(const TrainedModel& model, const Eigen::MatrixXd& xs);

// k-NN distance sum from x to the nominal training set.
double anomaly_score(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Detection detect(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);
void save_model(const std::string& path, const TrainedModel& model);
TrainedModel load_model(const std::string& path);

}  // namespace gemmed
