#include "gemmed/experiment.hpp"

#include <fstream>
#include <ostream>
#include <set>

#include "gemmed/errors.hpp"
#include "gemmed/eval.hpp"

namespace gemmed {

std::string to_string(Method method) {
  switch (method) {
    case Method::kGemMed: return "gemmed";
    case Method::kSvm: return "svm";
    case Method::kTwoStage: return "two-stage";
  }
  return "gemmed";
}

Method method_from_string(const std::string& name) {
  if (name == "gemmed") return Method::kGemMed;
  if (name == "svm") return Method::kSvm;
  if (name == "two-stage") return Method::kTwoStage;
  throw ConfigError("methods: unknown method '" + name + "' (expected gemmed, svm or two-stage)");
}

ExperimentSettings ring_experiment_settings() {
  ExperimentSettings s;
  s.kernel.kind = KernelKind::kRbf;
  s.kernel.gamma = 0.5;
  return s;
}

KernelSpec resolve_kernel(const ExperimentSettings& settings, const LabeledDataset& train) {
  KernelSpec k = settings.kernel;
  if (settings.gamma_auto && k.kind == KernelKind::kRbf) k.gamma = median_heuristic_gamma(train.features);
  return k;
}

TrainOptions cell_train_options(const ExperimentSettings& settings, double r_a, std::uint64_t seed) {
  TrainOptions o = settings.train;
  o.gem.target_coverage = settings.coverage.value_or(1.0 - r_a);
  o.gem.seed = seed;
  o.hyper.seed = seed;
  return o;
}

namespace {

std::vector<int> predict_rows(const TrainedModel& model, const LabeledDataset& data) {
  return predict_all(model, data.features);
}

void score_indicators(const TrainedModel& model, const LabeledDataset& train, CellResult& r) {
  if (std::count(train.anomaly.begin(), train.anomaly.end(), true) > 0) {
    const std::vector<double> eta(model.eta_hat.data(), model.eta_hat.data() + model.eta_hat.size());
    r.auc = auc(precision_recall_curve(eta, train.anomaly));
  }
  std::vector<bool> calls(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) calls[i] = !(model.eta_hat[static_cast<Eigen::Index>(i)] > 0.5);
  r.det_acc = detection_accuracy(calls, train.anomaly);
}

}  // namespace

CellRun run_cell(Method method, double R, double r_a, std::uint64_t seed, const ExperimentSettings& settings) {
  CellRun run;
  RingExperimentConfig cfg;
  cfg.R = R;
  cfg.r_a = r_a;
  cfg.n_train_per_class = settings.n_train_per_class;
  cfg.n_test_per_class = settings.n_test_per_class;
  cfg.seed = seed;
  run.data = generate(cfg);
  const KernelSpec kernel = resolve_kernel(settings, run.data.train);
  const TrainOptions options = cell_train_options(settings, r_a, seed);

  switch (method) {
    case Method::kGemMed:
      run.model = train(run.data.train, kernel, options);
      break;
    case Method::kSvm:
      run.model = train_svm(run.data.train, kernel, settings.svm);
      break;
    case Method::kTwoStage:
      run.model = train_two_stage(run.data.train, kernel, options.gem, settings.svm, options.alpha).model;
      break;
  }
  CellResult& r = run.result;
  r.method = method;
  r.R = R;
  r.r_a = r_a;
  r.seed = seed;
  r.error = misclassification_error(predict_rows(run.model, run.data.test), run.data.test.labels);
  if (method != Method::kSvm) score_indicators(run.model, run.data.train, r);
  return run;
}

namespace {

template <typename T>
T get_as(const nlohmann::json& node, const std::string& key) {
  try {
    return node.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void reject_unknown(const nlohmann::json& node, const std::string& where, const std::set<std::string>& allowed) {
  if (!node.is_object()) throw ConfigError("config key '" + where + "' must be an object");
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + (where.empty() ? key : where + "." + key) + "'");
  }
}

template <typename T>
std::vector<T> get_list(const nlohmann::json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ConfigError("missing config key '" + key + "'");
  const auto& node = doc.at(key);
  if (!node.is_array() || node.empty()) throw ConfigError("config key '" + key + "' must be a nonempty array");
  return get_as<std::vector<T>>(node, key);
}

}  // namespace

HyperParams parse_hyper(const nlohmann::json& node, HyperParams h) {
  reject_unknown(node, "hyper",
                 {"c", "lambda_cap", "a_eta", "p0", "steps", "rates", "gibbs", "svm_c", "early_stop"});
  bool cap_given = false;
  for (const auto& [key, v] : node.items()) {
    const std::string path = "hyper." + key;
    if (key == "c") h.c = get_as<double>(v, path);
    else if (key == "lambda_cap") { h.lambda_cap = get_as<double>(v, path); cap_given = true; }
    else if (key == "a_eta") h.a_eta = get_as<double>(v, path);
    else if (key == "p0") h.p0_override = get_as<double>(v, path);
    else if (key == "steps") h.steps = get_as<int>(v, path);
    else if (key == "svm_c") h.svm_c = get_as<double>(v, path);
    else if (key == "early_stop") h.early_stop = get_as<bool>(v, path);
    else if (key == "rates") {
      const auto r = get_as<std::vector<double>>(v, path);
      if (r.size() != 3) throw ConfigError("config key 'hyper.rates' must hold [phi, psi, tau]");
      h.rates = {r[0], r[1], r[2]};
    } else if (key == "gibbs") {
      const auto g = get_as<std::vector<int>>(v, path);
      if (g.size() != 3) throw ConfigError("config key 'hyper.gibbs' must hold [sweeps, draws, burn_in]");
      h.gibbs = {g[0], g[1], g[2]};
    }
  }
  if (!cap_given && node.contains("c")) h.lambda_cap = 0.99 * h.c;
  return h;
}

SweepConfig parse_sweep_config(const nlohmann::json& doc) {
  reject_unknown(doc, "", {"R", "r_a", "seeds", "methods", "n_train_per_class", "n_test_per_class", "kernel", "gem",
                           "hyper", "svm", "alpha"});
  SweepConfig c;
  c.settings = ring_experiment_settings();
  c.R = get_list<double>(doc, "R");
  c.r_a = get_list<double>(doc, "r_a");
  c.seeds = get_list<std::uint64_t>(doc, "seeds");
  for (const auto& m : get_list<std::string>(doc, "methods")) c.methods.push_back(method_from_string(m));
  for (double R : c.R) {
    if (!(R > 0.0)) throw ConfigError("config key 'R' must hold positive values");
  }
  for (double ra : c.r_a) {
    if (!(ra >= 0.0 && ra < 1.0)) throw ConfigError("config key 'r_a' must hold values in [0,1)");
  }

  ExperimentSettings& s = c.settings;
  if (doc.contains("n_train_per_class")) s.n_train_per_class = get_as<int>(doc["n_train_per_class"], "n_train_per_class");
  if (doc.contains("n_test_per_class")) s.n_test_per_class = get_as<int>(doc["n_test_per_class"], "n_test_per_class");
  if (s.n_train_per_class < 1 || s.n_test_per_class < 1) throw ConfigError("config key 'n_train_per_class' / 'n_test_per_class' must be positive");
  if (doc.contains("alpha")) s.train.alpha = get_as<double>(doc["alpha"], "alpha");

  if (doc.contains("kernel")) {
    const auto& k = doc["kernel"];
    reject_unknown(k, "kernel", {"kind", "gamma", "jitter"});
    try {
      if (k.contains("kind")) s.kernel.kind = kernel_kind_from_string(get_as<std::string>(k["kind"], "kernel.kind"));
    } catch (const InputError& e) {
      throw ConfigError(std::string("config key 'kernel.kind': ") + e.what());
    }
    if (k.contains("gamma")) {
      if (k["gamma"].is_string()) {
        if (k["gamma"].get<std::string>() != "auto") throw ConfigError("config key 'kernel.gamma' must be a number or \"auto\"");
        s.gamma_auto = true;
      } else {
        s.kernel.gamma = get_as<double>(k["gamma"], "kernel.gamma");
      }
    }
    if (k.contains("jitter")) s.kernel.jitter = get_as<double>(k["jitter"], "kernel.jitter");
  }
  if (doc.contains("gem")) {
    const auto& g = doc["gem"];
    reject_unknown(g, "gem", {"k", "partition_ratio", "target_coverage", "epsilon_gamma", "intrinsic_dim"});
    if (g.contains("k")) s.train.gem.k = get_as<int>(g["k"], "gem.k");
    if (g.contains("partition_ratio")) s.train.gem.partition_ratio = get_as<double>(g["partition_ratio"], "gem.partition_ratio");
    if (g.contains("target_coverage") && !g["target_coverage"].is_null()) {
      s.coverage = get_as<double>(g["target_coverage"], "gem.target_coverage");
    }
    if (g.contains("epsilon_gamma")) s.train.gem.epsilon_gamma = get_as<double>(g["epsilon_gamma"], "gem.epsilon_gamma");
    if (g.contains("intrinsic_dim")) s.train.gem.intrinsic_dim = get_as<int>(g["intrinsic_dim"], "gem.intrinsic_dim");
  }
  if (doc.contains("hyper")) s.train.hyper = parse_hyper(doc["hyper"], s.train.hyper);
  if (doc.contains("svm")) {
    const auto& v = doc["svm"];
    reject_unknown(v, "svm", {"C", "max_iter"});
    if (v.contains("C")) s.svm.C = get_as<double>(v["C"], "svm.C");
    if (v.contains("max_iter")) s.svm.max_iter = get_as<int>(v["max_iter"], "svm.max_iter");
  }
  try {
    s.kernel.validate();
    s.train.gem.validate();
    s.train.hyper.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_sweep_config(doc);
}

std::vector<CellResult> run_sweep(const SweepConfig& config) {
  std::vector<CellResult> rows;
  for (Method m : config.methods) {
    for (double R : config.R) {
      for (double ra : config.r_a) {
        for (std::uint64_t seed : config.seeds) rows.push_back(run_cell(m, R, ra, seed, config.settings).result);
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<CellResult>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NA"); };
  out << "method,R,r_a,seed,error,auc,det_acc\n";
  for (const auto& r : rows) {
    out << to_string(r.method) << ',' << format_double(r.R) << ',' << format_double(r.r_a) << ',' << r.seed << ','
        << format_double(r.error) << ',' << opt(r.auc) << ',' << opt(r.det_acc) << '\n';
  }
}

}  // namespace gemmed
