#pragma once

// Simulated ring-anomaly experiment: one cell generates data, fits a method
// and scores it; a sweep runs the grid described by a JSON config.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gemmed/baselines.hpp"
#include "gemmed/synthdata.hpp"
#include "gemmed/trainer.hpp"

namespace gemmed {

enum class Method { kGemMed, kSvm, kTwoStage };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct ExperimentSettings {
  KernelSpec kernel;
  bool gamma_auto = false;  // rbf only: median heuristic on the training features
  TrainOptions train;
  // Per-class nominal fraction; when absent each cell uses 1 - r_a.
  std::optional<double> coverage;
  SvmOptions svm;
  int n_train_per_class = 100;
  int n_test_per_class = 2000;
};

// Settings used for the ring experiment unless a config overrides them:
// rbf kernel with gamma 0.5, library defaults otherwise.
ExperimentSettings ring_experiment_settings();

struct CellResult {
  Method method = Method::kGemMed;
  double R = 0.0;
  double r_a = 0.0;
  std::uint64_t seed = 0;
  double error = 0.0;
  std::optional<double> auc;            // training anomaly ranking
  std::optional<double> det_acc;        // training anomaly calls vs. ground truth
};

struct CellRun {
  CellResult result;
  RingExperimentData data;
  TrainedModel model;
};

// Resolves gamma "auto" against the given training features.
KernelSpec resolve_kernel(const ExperimentSettings& settings, const LabeledDataset& train);

TrainOptions cell_train_options(const ExperimentSettings& settings, double r_a, std::uint64_t seed);

CellRun run_cell(Method method, double R, double r_a, std::uint64_t seed, const ExperimentSettings& settings);

struct SweepConfig {
  std::vector<double> R;
  std::vector<double> r_a;
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods;
  ExperimentSettings settings;
};

// Starts from ring_experiment_settings(). Throws ConfigError naming the
// offending key.
SweepConfig parse_sweep_config(const nlohmann::json& doc);
SweepConfig load_sweep_config(const std::string& path);

// Parses a hyperparameter object (keys as in the sweep config "hyper" block)
// on top of `base`.
HyperParams parse_hyper(const nlohmann::json& node, HyperParams base);

std::vector<CellResult> run_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& out, const std::vector<CellResult>& rows);

}  // namespace gemmed
