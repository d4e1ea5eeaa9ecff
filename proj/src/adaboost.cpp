#include "errsense/error.hpp"
#include "errsense/learn.hpp"

#include <algorithm>
#include <cmath>

namespace errsense {

TrainedModel train_adaboost(const Matrix& X, const Labels& y, std::span<const std::string> names,
                            const AdaBoostParams& hp, std::uint64_t seed) {
  check_binary_labels(X, y, 10);
  if (names.size() != static_cast<std::size_t>(X.cols())) throw SchemaError("one name per feature column required");
  if (hp.stump_depth == 0) throw ParameterError("stump_depth must be at least 1");
  const std::size_t n = y.size();
  const std::size_t d = names.size();

  TreeParams tp;
  tp.max_depth = hp.stump_depth;
  tp.min_leaf = 1;
  tp.max_features = 0;

  AdaBoostModel ada;
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<int> h(n);
  ada.stop_reason = "max_rounds";
  for (std::size_t r = 0; r < hp.n_rounds; ++r) {
    Tree tree = fit_tree(X, y, w, tp, nullptr);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = tree.predict({X.row(static_cast<Eigen::Index>(i)).data(), d}) >= 0.5 ? 1 : 0;
      if (h[i] != y[i]) err += w[i];
    }
    if (err >= 0.5) {
      ada.stop_reason = "round_error_at_least_half";
      break;
    }
    const double eps = std::max(err, 1e-10);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    ada.learners.push_back(std::move(tree));
    ada.alphas.push_back(alpha);
    if (err <= 0.0) {
      ada.weight_sums.push_back(1.0);
      ada.stop_reason = "zero_round_error";
      break;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(h[i] == y[i] ? -alpha : alpha);
      total += w[i];
    }
    double sum = 0.0;
    for (double& v : w) {
      v /= total;
      sum += v;
    }
    ada.weight_sums.push_back(sum);
  }

  TrainedModel m;
  m.kind = ClassifierKind::adaboost;
  m.feature_names.assign(names.begin(), names.end());
  m.seed = seed;
  m.hyperparameters = {{"n_rounds", hp.n_rounds}, {"stump_depth", hp.stump_depth}};
  std::size_t pos = 0;
  for (int v : y) pos += static_cast<std::size_t>(v);
  m.class_prior = static_cast<double>(pos) / static_cast<double>(n);
  m.params = std::move(ada);
  return m;
}

} // namespace errsense
