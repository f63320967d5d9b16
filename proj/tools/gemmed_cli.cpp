// gemmed command-line tool: simulate, train, predict, detect, evaluate,
// gradcheck, oracle-compare and sweep.
//
// Exit codes: 0 success, 1 contract or numerical failure, 2 input error.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gemmed/baselines.hpp"
#include "gemmed/dataset.hpp"
#include "gemmed/errors.hpp"
#include "gemmed/eval.hpp"
#include "gemmed/experiment.hpp"
#include "gemmed/model.hpp"
#include "gemmed/synthdata.hpp"
#include "gemmed/trainer.hpp"
#include "gemmed/validation.hpp"

namespace {

using namespace gemmed;

constexpr int kExitOk = 0;
constexpr int kExitContract = 1;
constexpr int kExitInput = 2;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

std::vector<double> split_reals(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError(flag + ": '" + item + "' is not a number");
    }
  }
  if (values.size() != expected) {
    throw InputError(flag + " expects " + std::to_string(expected) + " comma-separated values");
  }
  return values;
}

void check_dimension(const TrainedModel& model, const LabeledDataset& data) {
  if (data.features.cols() != model.support.cols()) {
    throw InputError("data has " + std::to_string(data.features.cols()) + " feature columns, model expects " +
                     std::to_string(model.support.cols()));
  }
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  RingExperimentConfig config;
  std::string out_train = "train.csv";
  std::string out_test = "test.csv";
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* cmd = app.add_subcommand("simulate", "Generate ring-corrupted training data and a clean test set");
  cmd->add_option("--R", a.config.R, "Inner ring radius")->capture_default_str();
  cmd->add_option("--ra", a.config.r_a, "Fraction of each class replaced by ring anomalies")->capture_default_str();
  cmd->add_option("--n-train", a.config.n_train_per_class, "Training samples per class")->capture_default_str();
  cmd->add_option("--n-test", a.config.n_test_per_class, "Test samples per class")->capture_default_str();
  cmd->add_option("--seed", a.config.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out-train", a.out_train, "Training CSV")->capture_default_str();
  cmd->add_option("--out-test", a.out_test, "Test CSV")->capture_default_str();
}

int run_simulate(const SimulateArgs& a) {
  const RingExperimentData data = generate(a.config);
  {
    auto out = open_output(a.out_train);
    write_csv(out, data.train, true);
  }
  {
    auto out = open_output(a.out_test);
    write_csv(out, data.test, true);
  }
  std::cout << "wrote " << data.train.size() << " training rows to " << a.out_train << " and " << data.test.size()
            << " test rows to " << a.out_test << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string method = "gemmed";
  std::string kernel = "rbf";
  std::string gamma = "0.5";
  double jitter = 1e-8;
  int k = 5;
  double coverage = 0.9;
  double partition_ratio = 0.3;
  double epsilon_gamma = 1e-3;
  double c = 10.0;
  std::optional<double> lambda_cap;
  double a_eta = 5.0;
  std::optional<double> p0;
  std::string rates = "2e-3,2e-2,2e-2";
  int steps = 200;
  std::string gibbs = "30,20,10";
  std::uint64_t seed = 0;
  double svm_c = 1.0;
  double alpha = 0.05;
  bool early_stop = false;
  std::string model_out = "model.json";
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Fit a classifier and write the model JSON");
  cmd->add_option("--data", a.data, "Training CSV (y, x1..xd[, is_anomaly])")->required();
  cmd->add_option("--method", a.method, "gemmed | svm | two-stage")
      ->check(CLI::IsMember({"gemmed", "svm", "two-stage"}))
      ->capture_default_str();
  cmd->add_option("--kernel", a.kernel, "linear | rbf")->check(CLI::IsMember({"linear", "rbf"}))->capture_default_str();
  cmd->add_option("--gamma", a.gamma, "rbf width, a number or 'auto' (median heuristic)")->capture_default_str();
  cmd->add_option("--jitter", a.jitter, "Diagonal jitter added to the Gram matrix")->capture_default_str();
  cmd->add_option("--k", a.k, "Nearest-neighbour count")->capture_default_str();
  cmd->add_option("--coverage", a.coverage, "Expected nominal fraction per class")->capture_default_str();
  cmd->add_option("--partition-ratio", a.partition_ratio, "Reference-part fraction per class")->capture_default_str();
  cmd->add_option("--epsilon-gamma", a.epsilon_gamma, "Slack added to the entropy level")->capture_default_str();
  cmd->add_option("--c", a.c, "Slack prior rate")->capture_default_str();
  cmd->add_option("--lambda-cap", a.lambda_cap, "Upper clip for lambda (default 0.99 c)");
  cmd->add_option("--a-eta", a.a_eta, "Indicator prior location, p0 = sigmoid(a_eta - 1)")->capture_default_str();
  cmd->add_option("--p0", a.p0, "Indicator prior probability (overrides --a-eta)");
  cmd->add_option("--rates", a.rates, "Step sizes phi,psi,tau for lambda, mu, kappa")->capture_default_str();
  cmd->add_option("--steps", a.steps, "Dual ascent iterations")->capture_default_str();
  cmd->add_option("--gibbs", a.gibbs, "Gibbs sweeps,inner draws,burn-in")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_option("--svm-c", a.svm_c, "Box constraint of the SVM (initialization and svm/two-stage methods)")
      ->capture_default_str();
  cmd->add_option("--alpha", a.alpha, "False-alarm level of the detector")->capture_default_str();
  cmd->add_flag("--early-stop", a.early_stop, "Stop once the projected gradient stays below 1e-3");
  cmd->add_option("--model-out", a.model_out, "Output model JSON")->capture_default_str();
}

KernelSpec kernel_from_args(const TrainArgs& a, const LabeledDataset& data) {
  KernelSpec spec;
  spec.kind = kernel_kind_from_string(a.kernel);
  spec.jitter = a.jitter;
  if (a.gamma == "auto") {
    if (spec.kind == KernelKind::kRbf) spec.gamma = median_heuristic_gamma(data.features);
  } else {
    spec.gamma = split_reals(a.gamma, 1, "--gamma")[0];
  }
  spec.validate();
  return spec;
}

TrainOptions options_from_args(const TrainArgs& a) {
  TrainOptions o;
  o.gem.k = a.k;
  o.gem.partition_ratio = a.partition_ratio;
  o.gem.target_coverage = a.coverage;
  o.gem.epsilon_gamma = a.epsilon_gamma;
  o.gem.seed = a.seed;
  HyperParams& h = o.hyper;
  h.c = a.c;
  h.lambda_cap = a.lambda_cap.value_or(0.99 * a.c);
  h.a_eta = a.a_eta;
  h.p0_override = a.p0;
  const auto r = split_reals(a.rates, 3, "--rates");
  h.rates = {r[0], r[1], r[2]};
  h.steps = a.steps;
  const auto g = split_reals(a.gibbs, 3, "--gibbs");
  h.gibbs = {static_cast<int>(g[0]), static_cast<int>(g[1]), static_cast<int>(g[2])};
  h.seed = a.seed;
  h.svm_c = a.svm_c;
  h.early_stop = a.early_stop;
  o.alpha = a.alpha;
  o.gem.validate();
  return o;
}

int run_train(const TrainArgs& a) {
  const LabeledDataset data = read_csv_file(a.data);
  data.validate_two_class();
  const KernelSpec kernel = kernel_from_args(a, data);
  const TrainOptions options = options_from_args(a);
  for (const auto& w : options.hyper.validate()) std::cerr << "warning: " << w << "\n";

  TrainedModel model;
  if (a.method == "gemmed") {
    model = train(data, kernel, options);
    std::cout << "final dual objective estimate: " << format_double(model.trace.back()) << "\n";
  } else if (a.method == "svm") {
    model = train_svm(data, kernel, SvmOptions{a.svm_c, 10000});
  } else {
    const TwoStageResult r = train_two_stage(data, kernel, options.gem, SvmOptions{a.svm_c, 10000}, a.alpha);
    model = r.model;
    std::cout << "screened out " << r.removed.size() << " training rows\n";
  }
  std::cout << "mean eta_hat: " << format_double(model.eta_hat.mean()) << "\n";
  std::cout << "nominal set size: " << model.nominal_rows().size() << "\n";
  save_model(a.model_out, model);
  std::cout << "wrote " << a.model_out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------------- predict

struct ApplyArgs {
  std::string model;
  std::string data;
  std::string out;
};

void add_apply(CLI::App& app, ApplyArgs& a, const std::string& name, const std::string& help,
               const std::string& default_out) {
  a.out = default_out;
  auto* cmd = app.add_subcommand(name, help);
  cmd->add_option("--model", a.model, "Model JSON")->required();
  cmd->add_option("--data", a.data, "Input CSV (x1..xd, optional y and is_anomaly columns)")->required();
  cmd->add_option("--out", a.out, "Output CSV")->capture_default_str();
}

int run_predict(const ApplyArgs& a) {
  const TrainedModel model = load_model(a.model);
  const LabeledDataset data = read_csv_file(a.data);
  check_dimension(model, data);
  const auto labels = predict_all(model, data.features);
  auto out = open_output(a.out);
  out << "label\n";
  for (int y : labels) out << y << "\n";
  std::cout << "wrote " << labels.size() << " predictions to " << a.out << "\n";
  return kExitOk;
}

int run_detect(const ApplyArgs& a) {
  const TrainedModel model = load_model(a.model);
  const LabeledDataset data = read_csv_file(a.data);
  check_dimension(model, data);
  auto out = open_output(a.out);
  out << "score,call\n";
  std::size_t flagged = 0;
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    const Eigen::VectorXd x = data.features.row(i).transpose();
    const double score = anomaly_score(model, x);
    const bool anomalous = detect(model, x) == Detection::kAnomaly;
    flagged += anomalous ? 1 : 0;
    out << format_double(score) << "," << (anomalous ? "anomaly" : "nominal") << "\n";
  }
  std::cout << "flagged " << flagged << " of " << data.size() << " rows (theta " << format_double(*model.theta)
            << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string truth;
  std::string predictions;
  std::string detections;
  std::string model;
  std::string curve_out = "pr_curve.csv";
  std::string report;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* cmd = app.add_subcommand(
      "evaluate",
      "Score outputs against a truth CSV. Low eta_hat means anomalous: the PR curve selects rows with "
      "eta_hat <= rho.");
  cmd->add_option("--truth", a.truth, "Truth CSV (y and/or is_anomaly columns)")->required();
  cmd->add_option("--predictions", a.predictions, "Output of predict");
  cmd->add_option("--detections", a.detections, "Output of detect");
  cmd->add_option("--model", a.model, "GEM-MED model; its eta_hat is ranked against the truth anomaly flags");
  cmd->add_option("--curve-out", a.curve_out, "PR curve CSV (with --model)")->capture_default_str();
  cmd->add_option("--report", a.report, "Write the JSON report here instead of stdout");
}

std::vector<std::vector<std::string>> read_table(const std::string& path, const std::string& expected_header) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != expected_header) {
    throw InputError("'" + path + "' must start with header '" + expected_header + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

void require_rows(std::size_t got, std::size_t want, const std::string& what) {
  if (got != want) {
    throw InputError(what + " has " + std::to_string(got) + " rows, truth has " + std::to_string(want));
  }
}

int run_evaluate(const EvaluateArgs& a) {
  const LabeledDataset truth = read_csv_file(a.truth);
  nlohmann::json report = {{"error", nullptr}, {"pr_curve", nullptr}, {"auc", nullptr}, {"detection_accuracy", nullptr}};

  if (!a.predictions.empty()) {
    if (!truth.has_labels()) throw InputError("truth file has no y column");
    const auto rows = read_table(a.predictions, "label");
    require_rows(rows.size(), truth.size(), a.predictions);
    std::vector<int> predicted;
    for (const auto& r : rows) {
      if (r.size() != 1 || (r[0] != "1" && r[0] != "-1")) throw InputError(a.predictions + ": labels must be -1 or 1");
      predicted.push_back(r[0] == "1" ? 1 : -1);
    }
    report["error"] = misclassification_error(predicted, truth.labels);
  }
  if (!a.detections.empty()) {
    if (truth.anomaly.empty()) throw InputError("truth file has no is_anomaly column");
    const auto rows = read_table(a.detections, "score,call");
    require_rows(rows.size(), truth.size(), a.detections);
    std::vector<bool> calls;
    for (const auto& r : rows) {
      if (r.size() != 2 || (r[1] != "anomaly" && r[1] != "nominal")) {
        throw InputError(a.detections + ": call must be 'anomaly' or 'nominal'");
      }
      calls.push_back(r[1] == "anomaly");
    }
    report["detection_accuracy"] = detection_accuracy(calls, truth.anomaly);
  }
  if (!a.model.empty()) {
    if (truth.anomaly.empty()) throw InputError("truth file has no is_anomaly column");
    const TrainedModel model = load_model(a.model);
    require_rows(static_cast<std::size_t>(model.eta_hat.size()), truth.size(), "model eta_hat");
    const std::vector<double> scores(model.eta_hat.data(), model.eta_hat.data() + model.eta_hat.size());
    const auto curve = precision_recall_curve(scores, truth.anomaly);
    auto out = open_output(a.curve_out);
    out << "rho,precision,recall\n";
    for (const auto& p : curve) {
      out << format_double(p.rho) << "," << format_double(p.precision) << "," << format_double(p.recall) << "\n";
    }
    report["pr_curve"] = a.curve_out;
    report["auc"] = auc(curve);
  }

  const std::string text = report.dump(2);
  if (a.report.empty()) {
    std::cout << text << "\n";
  } else {
    auto out = open_output(a.report);
    out << text << "\n";
  }
  return kExitOk;
}

// ------------------------------------------------- gradcheck / oracle-compare

struct CheckArgs {
  std::size_t n = 6;
  std::uint64_t seed = 0;
  int trials = 20;
  double tolerance = 1e-5;
  std::string gibbs = "200,50,20";
};

void add_gradcheck(CLI::App& app, CheckArgs& a) {
  auto* cmd = app.add_subcommand("gradcheck", "Compare the dual gradient with finite differences of the exact dual");
  cmd->add_option("--n", a.n, "Instance size (at most 16)")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_option("--trials", a.trials, "Random instances")->capture_default_str();
  cmd->add_option("--tolerance", a.tolerance, "Largest accepted relative error")->capture_default_str();
}

void add_oracle_compare(CLI::App& app, CheckArgs& a) {
  a.trials = 100;
  auto* cmd = app.add_subcommand("oracle-compare", "Compare Gibbs expectations with exact enumeration");
  cmd->add_option("--n", a.n, "Instance size (at most 16)")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
  cmd->add_option("--trials", a.trials, "Random instances")->capture_default_str();
  cmd->add_option("--gibbs", a.gibbs, "Gibbs sweeps,inner draws,burn-in")->capture_default_str();
}

void check_size(std::size_t n) {
  if (n < 2 || n > kOracleMaxSize) {
    throw InputError("--n must lie in [2, " + std::to_string(kOracleMaxSize) + "]; exact enumeration is capped");
  }
}

int run_gradcheck(const CheckArgs& a) {
  check_size(a.n);
  double worst = 0.0;
  for (int t = 0; t < a.trials; ++t) {
    const auto instance = random_validation_instance(a.n, derive_seed(a.seed, static_cast<std::uint64_t>(t)));
    worst = std::max(worst, gradient_check(instance));
  }
  std::cout << "max relative gradient error over " << a.trials << " trials: " << format_double(worst) << "\n";
  return worst <= a.tolerance ? kExitOk : kExitContract;
}

int run_oracle_compare(const CheckArgs& a) {
  check_size(a.n);
  const auto g = split_reals(a.gibbs, 3, "--gibbs");
  const GibbsSettings settings{static_cast<int>(g[0]), static_cast<int>(g[1]), static_cast<int>(g[2])};
  double max_z = 0.0;
  int statistics = 0;
  int within = 0;
  int clean_trials = 0;
  for (int t = 0; t < a.trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(a.seed, static_cast<std::uint64_t>(t));
    const auto instance = random_validation_instance(a.n, trial_seed);
    const SamplerCheck c = sampler_check(instance, settings, derive_seed(trial_seed, streams::kGibbs));
    max_z = std::max(max_z, c.max_z);
    statistics += c.statistics;
    within += c.within;
    clean_trials += c.all_within() ? 1 : 0;
  }
  const double fraction = static_cast<double>(within) / statistics;
  std::cout << "max standardized deviation: " << format_double(max_z) << "\n"
            << "expectations within 3 standard errors: " << within << "/" << statistics << " ("
            << format_double(fraction) << ")\n"
            << "trials with every expectation within 3 standard errors: " << clean_trials << "/" << a.trials << "\n";
  return fraction >= 0.95 ? kExitOk : kExitContract;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string out;
};

void add_sweep(CLI::App& app, SweepArgs& a) {
  auto* cmd = app.add_subcommand("sweep", "Run the ring experiment grid from a JSON config and write a tidy CSV");
  cmd->add_option("--config", a.config, "Sweep config JSON (see configs/)")->required();
  cmd->add_option("--out", a.out, "Output CSV (stdout when omitted)");
}

int run_sweep_command(const SweepArgs& a) {
  const SweepConfig config = load_sweep_config(a.config);
  for (const auto& w : config.settings.train.hyper.validate()) std::cerr << "warning: " << w << "\n";
  const auto rows = run_sweep(config);
  if (a.out.empty()) {
    write_sweep_csv(std::cout, rows);
  } else {
    auto out = open_output(a.out);
    write_sweep_csv(out, rows);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust kernel classification with joint anomaly screening"};
  app.require_subcommand(1);

  SimulateArgs simulate;
  TrainArgs train_args;
  ApplyArgs predict_args;
  ApplyArgs detect_args;
  EvaluateArgs evaluate;
  CheckArgs gradcheck;
  CheckArgs oracle_compare;
  SweepArgs sweep;
  add_simulate(app, simulate);
  add_train(app, train_args);
  add_apply(app, predict_args, "predict", "Write predicted labels for each row", "predictions.csv");
  add_apply(app, detect_args, "detect", "Write k-NN anomaly scores and calls for each row", "detections.csv");
  add_evaluate(app, evaluate);
  add_gradcheck(app, gradcheck);
  add_oracle_compare(app, oracle_compare);
  add_sweep(app, sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "simulate") return run_simulate(simulate);
    if (name == "train") return run_train(train_args);
    if (name == "predict") return run_predict(predict_args);
    if (name == "detect") return run_detect(detect_args);
    if (name == "evaluate") return run_evaluate(evaluate);
    if (name == "gradcheck") return run_gradcheck(gradcheck);
    if (name == "oracle-compare") return run_oracle_compare(oracle_compare);
    if (name == "sweep") return run_sweep_command(sweep);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitContract;
  }
  return kExitContract;
}
