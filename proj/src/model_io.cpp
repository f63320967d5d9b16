#include <fstream>

#include "gemmed/errors.hpp"
#include "gemmed/gem.hpp"
#include "gemmed/model.hpp"

namespace gemmed {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kGemMed: return "gemmed";
    case ModelKind::kSvm: return "svm";
    case ModelKind::kTwoStage: return "two-stage";
  }
  return "gemmed";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "gemmed") return ModelKind::kGemMed;
  if (name == "svm") return ModelKind::kSvm;
  if (name == "two-stage") return ModelKind::kTwoStage;
  throw InputError("unknown model kind '" + name + "' (expected gemmed, svm or two-stage)");
}

std::vector<std::size_t> TrainedModel::nominal_rows() const {
  std::vector<std::size_t> rows;
  for (Eigen::Index i = 0; i < eta_hat.size(); ++i) {
    if (eta_hat[i] > 0.5) rows.push_back(static_cast<std::size_t>(i));
  }
  return rows;
}

Eigen::MatrixXd TrainedModel::nominal_points() const {
  const auto rows = nominal_rows();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), support.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = support.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

void TrainedModel::validate() const {
  kernel.validate();
  const auto n = support.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n || lambda_star.size() != n || eta_hat.size() != n) {
    throw InputError("model: support, labels, lambda and eta_hat sizes differ");
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw InputError("model: labels must be -1 or +1");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(eta_hat[i] >= 0.0 && eta_hat[i] <= 1.0)) throw InputError("model: eta_hat outside [0,1]");
  }
  if (k < 1) throw InputError("model: k must be >= 1");
}

double decision_value(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.support.cols()) {
    throw InputError("model expects " + std::to_string(model.support.cols()) + " features, got " +
                     std::to_string(x.size()));
  }
  double value = 0.0;
  for (Eigen::Index i = 0; i < model.support.rows(); ++i) {
    value += model.eta_hat[i] * model.lambda_star[i] * model.labels[static_cast<std::size_t>(i)] *
             kernel_eval(model.kernel, x, model.support.row(i).transpose());
  }
  return value;
}

int predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return decision_value(model, x) >= 0.0 ? +1 : -1;
}

std::vector<int> predict_all(const TrainedModel& model, const Eigen::MatrixXd& xs) {
  std::vector<int> out(static_cast<std::size_t>(xs.rows()));
  for (Eigen::Index i = 0; i < xs.rows(); ++i) out[static_cast<std::size_t>(i)] = predict(model, xs.row(i).transpose());
  return out;
}

double anomaly_score(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Eigen::MatrixXd nominal = model.nominal_points();
  if (nominal.rows() < model.k) {
    throw ConfigError("nominal set has " + std::to_string(nominal.rows()) + " points, fewer than k = " +
                      std::to_string(model.k));
  }
  if (x.size() != nominal.cols()) {
    throw InputError("model expects " + std::to_string(nominal.cols()) + " features, got " + std::to_string(x.size()));
  }
  return knn_distance_sum(x, nominal, model.k);
}

Detection detect(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (!model.theta) throw ConfigError("model of kind '" + to_string(model.kind) + "' has no anomaly detector");
  return anomaly_score(model, x) > *model.theta ? Detection::kAnomaly : Detection::kNominal;
}

namespace {

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json model_to_json(const TrainedModel& m) {
  nlohmann::json features = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.support.rows(); ++i) features.push_back(to_vec(m.support.row(i).transpose()));
  return {
      {"format_version", kModelFormatVersion},
      {"model_kind", to_string(m.kind)},
      {"kernel", {{"kind", to_string(m.kernel.kind)}, {"gamma", m.kernel.gamma}, {"jitter", m.kernel.jitter}}},
      {"support", {{"dim", m.support.cols()}, {"features", features}, {"labels", m.labels}}},
      {"lambda_star", to_vec(m.lambda_star)},
      {"eta_hat", to_vec(m.eta_hat)},
      {"gamma_hat", {{"neg", m.gamma_hat[0]}, {"pos", m.gamma_hat[1]}}},
      {"beta_hat", {{"neg", m.beta_hat[0]}, {"pos", m.beta_hat[1]}}},
      {"mu", {{"neg", m.mu[0]}, {"pos", m.mu[1]}}},
      {"kappa", {{"neg", m.kappa[0]}, {"pos", m.kappa[1]}}},
      {"detector", {{"k", m.k}, {"alpha", m.alpha}, {"theta", m.theta ? nlohmann::json(*m.theta) : nlohmann::json()}}},
      {"trace", m.trace},
      {"hyperparameters", m.hyper},
  };
}

TrainedModel model_from_json(const nlohmann::json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw InputError("model: unsupported format_version " + std::to_string(version));
    }
    TrainedModel m;
    m.kind = model_kind_from_string(doc.at("model_kind").get<std::string>());
    const auto& kernel = doc.at("kernel");
    m.kernel.kind = kernel_kind_from_string(kernel.at("kind").get<std::string>());
    m.kernel.gamma = kernel.at("gamma").get<double>();
    m.kernel.jitter = kernel.at("jitter").get<double>();

    const auto& support = doc.at("support");
    const auto dim = support.at("dim").get<Eigen::Index>();
    const auto& features = support.at("features");
    m.support.resize(static_cast<Eigen::Index>(features.size()), dim);
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto row = features[i].get<std::vector<double>>();
      if (static_cast<Eigen::Index>(row.size()) != dim) throw InputError("model: support row has wrong dimension");
      m.support.row(static_cast<Eigen::Index>(i)) = from_vec(row).transpose();
    }
    m.labels = support.at("labels").get<std::vector<int>>();
    m.lambda_star = from_vec(doc.at("lambda_star").get<std::vector<double>>());
    m.eta_hat = from_vec(doc.at("eta_hat").get<std::vector<double>>());
    auto per_class = [&](const char* key) {
      const auto& node = doc.at(key);
      return PerClass<double>{node.at("neg").get<double>(), node.at("pos").get<double>()};
    };
    m.gamma_hat = per_class("gamma_hat");
    m.beta_hat = per_class("beta_hat");
    m.mu = per_class("mu");
    m.kappa = per_class("kappa");
    const auto& det = doc.at("detector");
    m.k = det.at("k").get<int>();
    m.alpha = det.at("alpha").get<double>();
    if (!det.at("theta").is_null()) m.theta = det.at("theta").get<double>();
    m.trace = doc.at("trace").get<std::vector<double>>();
    m.hyper = doc.at("hyperparameters");
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model: malformed document: ") + e.what());
  }
}

void save_model(const std::string& path, const TrainedModel& model) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw InputError("write to '" + path + "' failed");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("model '" + path + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace gemmed
