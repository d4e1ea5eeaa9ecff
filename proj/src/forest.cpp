#include "errsense/error.hpp"
#include "errsense/learn.hpp"
#include "errsense/rng.hpp"

#include <cmath>

namespace errsense {

TrainedModel train_random_forest(const Matrix& X, const Labels& y, std::span<const std::string> names,
                                 const ForestParams& hp, std::uint64_t seed) {
  check_binary_labels(X, y, 10);
  if (names.size() != static_cast<std::size_t>(X.cols())) throw SchemaError("one name per feature column required");
  if (hp.n_trees == 0) throw ParameterError("a forest needs at least one tree");
  const std::size_t n = y.size();
  const std::size_t d = names.size();

  TreeParams tp;
  tp.max_depth = hp.max_depth;
  tp.min_leaf = hp.min_leaf;
  tp.max_features = hp.features_per_split != 0
                        ? hp.features_per_split
                        : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(double(d)))));

  ForestModel forest;
  std::vector<double> oob_sum(n, 0.0);
  std::vector<std::size_t> oob_votes(n, 0);
  for (std::size_t t = 0; t < hp.n_trees; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> counts(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) counts[rng.below(n)] += 1.0;
    Tree tree = fit_tree(X, y, counts, tp, &rng);
    for (std::size_t i = 0; i < n; ++i) {
      if (counts[i] == 0.0) {
        oob_sum[i] += tree.predict({X.row(static_cast<Eigen::Index>(i)).data(), d});
        ++oob_votes[i];
      }
    }
    forest.trees.push_back(std::move(tree));
  }
  std::size_t scored = 0, correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_votes[i] == 0) continue;
    ++scored;
    const int label = oob_sum[i] / static_cast<double>(oob_votes[i]) >= 0.5 ? 1 : 0;
    if (label == y[i]) ++correct;
  }
  forest.oob_accuracy = scored ? static_cast<double>(correct) / static_cast<double>(scored) : 0.0;

  TrainedModel m;
  m.kind = ClassifierKind::random_forest;
  m.feature_names.assign(names.begin(), names.end());
  m.seed = seed;
  m.hyperparameters = {{"n_trees", hp.n_trees},
                       {"max_depth", hp.max_depth},
                       {"min_leaf", hp.min_leaf},
                       {"features_per_split", tp.max_features}};
  std::size_t pos = 0;
  for (int v : y) pos += static_cast<std::size_t>(v);
  m.class_prior = static_cast<double>(pos) / static_cast<double>(n);
  m.params = std::move(forest);
  return m;
}

} // namespace errsense
