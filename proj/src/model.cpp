#include "errsense/error.hpp"
#include "errsense/learn.hpp"

#include <cmath>
#include <unordered_map>

namespace errsense {

using nlohmann::json;

namespace {

constexpr int kModelFormatVersion = 1;

json tree_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return nodes;
}

Tree tree_from_json(const json& j) {
  Tree t;
  for (const auto& n : j) {
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>()});
  }
  const auto size = static_cast<int>(t.nodes.size());
  if (size == 0) throw FormatError("model tree has no nodes");
  for (const auto& n : t.nodes) {
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size)) {
      throw FormatError("model tree has a dangling child index");
    }
  }
  return t;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<double> row(m.row(r).data(), m.row(r).data() + m.cols());
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = j.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
    if (static_cast<Eigen::Index>(row.size()) != cols) throw FormatError("ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

std::string_view to_string(ClassifierKind k) {
  switch (k) {
  case ClassifierKind::random_forest: return "random_forest";
  case ClassifierKind::adaboost: return "adaboost";
  case ClassifierKind::mlp: return "mlp";
  }
  return "?";
}

ClassifierKind parse_classifier(std::string_view s) {
  if (s == "random_forest") return ClassifierKind::random_forest;
  if (s == "adaboost") return ClassifierKind::adaboost;
  if (s == "mlp") return ClassifierKind::mlp;
  throw FormatError("unknown classifier '" + std::string(s) + "'");
}

json TrainedModel::to_json() const {
  json j;
  j["format"] = "errsense-model";
  j["format_version"] = kModelFormatVersion;
  j["kind"] = std::string(errsense::to_string(kind));
  j["seed"] = seed;
  j["hyperparameters"] = hyperparameters;
  j["class_prior"] = class_prior;
  j["feature_names"] = feature_names;
  json p;
  if (const auto* f = std::get_if<ForestModel>(&params)) {
    p["oob_accuracy"] = f->oob_accuracy;
    p["trees"] = json::array();
    for (const auto& t : f->trees) p["trees"].push_back(tree_json(t));
  } else if (const auto* a = std::get_if<AdaBoostModel>(&params)) {
    p["alphas"] = a->alphas;
    p["weight_sums"] = a->weight_sums;
    p["stop_reason"] = a->stop_reason;
    p["learners"] = json::array();
    for (const auto& t : a->learners) p["learners"].push_back(tree_json(t));
  } else {
    const auto& m = std::get<MlpModel>(params);
    p["activation"] = m.activation == Activation::relu ? "relu" : "tanh";
    p["mean"] = vector_json(m.mean);
    p["scale"] = vector_json(m.scale);
    p["final_loss"] = m.final_loss;
    p["layers"] = json::array();
    for (const auto& l : m.layers) p["layers"].push_back({{"W", matrix_json(l.W)}, {"b", vector_json(l.b)}});
  }
  j["parameters"] = std::move(p);
  return j;
}

TrainedModel TrainedModel::from_json(const json& j) {
  try {
    if (j.at("format") != "errsense-model" || j.at("format_version") != kModelFormatVersion) {
      throw FormatError("not an errsense model file of a supported version");
    }
    TrainedModel m;
    m.kind = parse_classifier(j.at("kind").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.hyperparameters = j.at("hyperparameters");
    m.class_prior = j.at("class_prior").get<double>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const json& p = j.at("parameters");
    switch (m.kind) {
    case ClassifierKind::random_forest: {
      ForestModel f;
      f.oob_accuracy = p.at("oob_accuracy").get<double>();
      for (const auto& t : p.at("trees")) f.trees.push_back(tree_from_json(t));
      m.params = std::move(f);
      break;
    }
    case ClassifierKind::adaboost: {
      AdaBoostModel a;
      a.alphas = p.at("alphas").get<std::vector<double>>();
      a.weight_sums = p.at("weight_sums").get<std::vector<double>>();
      a.stop_reason = p.at("stop_reason").get<std::string>();
      for (const auto& t : p.at("learners")) a.learners.push_back(tree_from_json(t));
      if (a.alphas.size() != a.learners.size()) throw FormatError("AdaBoost alphas and learners differ in count");
      m.params = std::move(a);
      break;
    }
    case ClassifierKind::mlp: {
      MlpModel mm;
      mm.activation = p.at("activation") == "relu" ? Activation::relu : Activation::tanh;
      mm.mean = vector_from_json(p.at("mean"));
      mm.scale = vector_from_json(p.at("scale"));
      mm.final_loss = p.at("final_loss").get<double>();
      for (const auto& l : p.at("layers")) mm.layers.push_back({matrix_from_json(l.at("W")), vector_from_json(l.at("b"))});
      m.params = std::move(mm);
      break;
    }
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

Prediction predict(const TrainedModel& model, const Matrix& X, std::span<const std::string> names) {
  const std::size_t d = model.feature_names.size();
  if (names.size() != d || static_cast<std::size_t>(X.cols()) != d) {
    throw SchemaError("feature count " + std::to_string(names.size()) + " does not match the model's " +
                      std::to_string(d));
  }
  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < names.size(); ++c) column.emplace(names[c], c);
  std::vector<Eigen::Index> order(d);
  bool identity = true;
  for (std::size_t k = 0; k < d; ++k) {
    auto it = column.find(model.feature_names[k]);
    if (it == column.end()) throw SchemaError("input lacks feature '" + model.feature_names[k] + "'");
    order[k] = static_cast<Eigen::Index>(it->second);
    identity = identity && it->second == k;
  }
  Matrix aligned;
  if (!identity) {
    aligned.resize(X.rows(), X.cols());
    for (std::size_t k = 0; k < d; ++k) aligned.col(static_cast<Eigen::Index>(k)) = X.col(order[k]);
  }
  const Matrix& A = identity ? X : aligned;
  const auto n = static_cast<std::size_t>(A.rows());

  Prediction out;
  out.probability.resize(n);
  if (const auto* f = std::get_if<ForestModel>(&model.params)) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> row(A.row(static_cast<Eigen::Index>(i)).data(), d);
      double s = 0.0;
      for (const auto& t : f->trees) s += t.predict(row);
      out.probability[i] = f->trees.empty() ? 0.5 : s / static_cast<double>(f->trees.size());
    }
  } else if (const auto* a = std::get_if<AdaBoostModel>(&model.params)) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::span<const double> row(A.row(static_cast<Eigen::Index>(i)).data(), d);
      double score = 0.0;
      for (std::size_t r = 0; r < a->learners.size(); ++r) {
        score += a->alphas[r] * (a->learners[r].predict(row) >= 0.5 ? 1.0 : -1.0);
      }
      out.probability[i] = 1.0 / (1.0 + std::exp(-2.0 * score));
    }
  } else {
    out.probability = mlp_probability(std::get<MlpModel>(model.params), A);
  }
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = out.probability[i] >= 0.5 ? 1 : 0;
  return out;
}

} // namespace errsense
