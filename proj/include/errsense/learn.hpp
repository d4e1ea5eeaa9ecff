#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace errsense {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Binary labels: 1 = error (positive class), 0 = non-error.
using Labels = std::vector<int>;

enum class ClassifierKind { random_forest, adaboost, mlp };
std::string_view to_string(ClassifierKind k);
ClassifierKind parse_classifier(std::string_view s);

// CART ---------------------------------------------------------------------

struct TreeParams {
  std::size_t max_depth{8};
  std::size_t min_leaf{2};
  std::size_t max_features{0}; // features tried per split, 0 = all
};

struct TreeNode {
  int feature{-1}; // -1 marks a leaf
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double value{0.0}; // weighted error fraction at the node
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(std::span<const double> row) const;
};

class Rng;

// Weighted Gini CART. Rows with zero weight are ignored. Splits send
// x <= threshold left; thresholds are midpoints between distinct values.
// `rng` draws the per-node feature subset when max_features > 0.
Tree fit_tree(const Matrix& X, const Labels& y, std::span<const double> weights, const TreeParams& p, Rng* rng);

// Classifiers ----------------------------------------------------------------

struct ForestParams {
  std::size_t n_trees{100};
  std::size_t max_depth{8};
  std::size_t min_leaf{2};
  std::size_t features_per_split{0}; // 0 = floor(sqrt(n_features))
};

struct AdaBoostParams {
  std::size_t n_rounds{100};
  std::size_t stump_depth{1};
};

enum class Activation { relu, tanh };

struct MlpParams {
  std::vector<std::size_t> hidden{64};
  Activation activation{Activation::relu};
  std::size_t epochs{200};
  std::size_t batch{32};
  double lr{1e-3};
  double l2{1e-4};
};

struct ForestModel {
  std::vector<Tree> trees;
  double oob_accuracy{0.0};
};

struct AdaBoostModel {
  std::vector<Tree> learners;
  std::vector<double> alphas;
  std::vector<double> weight_sums; // sample-weight total after each round
  std::string stop_reason;
};

struct MlpLayer {
  Matrix W; // out x in
  Vector b;
};

struct MlpModel {
  Activation activation{Activation::relu};
  Vector mean;
  Vector scale;
  std::vector<MlpLayer> layers; // hidden layers, then the 1-unit output
  double final_loss{0.0};
};

struct TrainedModel {
  ClassifierKind kind{ClassifierKind::random_forest};
  std::vector<std::string> feature_names;
  std::uint64_t seed{0};
  nlohmann::json hyperparameters;
  double class_prior{0.5}; // fraction of error labels in training
  std::variant<ForestModel, AdaBoostModel, MlpModel> params;

  nlohmann::json to_json() const;
  static TrainedModel from_json(const nlohmann::json& j);
};

TrainedModel train_random_forest(const Matrix& X, const Labels& y, std::span<const std::string> names,
                                 const ForestParams& hp, std::uint64_t seed);
TrainedModel train_adaboost(const Matrix& X, const Labels& y, std::span<const std::string> names,
                            const AdaBoostParams& hp, std::uint64_t seed);
TrainedModel train_mlp(const Matrix& X, const Labels& y, std::span<const std::string> names, const MlpParams& hp,
                       std::uint64_t seed);

struct Prediction {
  std::vector<double> probability; // of the error class
  Labels labels;                   // probability >= 0.5 -> 1
};

// Columns are matched to the model by name; SchemaError when a model
// feature is missing or the name lists differ in size.
Prediction predict(const TrainedModel& model, const Matrix& X, std::span<const std::string> names);

// MLP internals used by the gradient check. Loss is mean binary cross
// entropy plus 0.5 * l2 * sum of squared weights (biases excluded), taken on
// already standardised inputs.
struct MlpGradient {
  double loss{0.0};
  std::vector<MlpLayer> grad;
};
MlpGradient mlp_loss_and_gradient(const MlpModel& m, const Matrix& Xs, const Labels& y, double l2);
double mlp_loss(const MlpModel& m, const Matrix& Xs, const Labels& y, double l2);
// Probabilities for raw (unstandardised) rows.
std::vector<double> mlp_probability(const MlpModel& m, const Matrix& X);
MlpModel mlp_init(std::size_t n_inputs, const MlpParams& hp, double prior, std::uint64_t seed);

void check_binary_labels(const Matrix& X, const Labels& y, std::size_t min_rows);

} // namespace errsense
