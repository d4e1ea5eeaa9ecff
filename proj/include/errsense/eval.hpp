#pragma once

#include "errsense/dataset.hpp"
#include "errsense/learn.hpp"
#include "errsense/stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace errsense {

enum class Strategy { per_participant_cv, grouped_cv, lopo };
std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::string> test_participants;
};

struct FoldPlan {
  Strategy strategy{Strategy::grouped_cv};
  std::vector<Fold> folds;
};

// per_participant_cv needs a single-participant dataset and stratifies by
// label; grouped_cv deals shuffled participants round-robin into k groups;
// lopo holds out one participant per fold. ParameterError on violated
// preconditions (too few participants, k > participants, k < 2).
FoldPlan plan_folds(const Dataset& d, Strategy strategy, std::size_t k = 5, std::uint64_t seed = 0);

// InvariantError if a fold shares a participant between train and test
// (grouped strategies), or if the test sets overlap or miss samples.
void check_fold_plan(const Dataset& d, const FoldPlan& plan);

struct LearnConfig {
  ForestParams forest{};
  AdaBoostParams adaboost{};
  MlpParams mlp{};
};

TrainedModel train_model(ClassifierKind kind, const Matrix& X, const Labels& y, std::span<const std::string> names,
                         const LearnConfig& cfg, std::uint64_t seed);

// Design matrix and labels for a set of sample indices.
Matrix design_matrix(const Dataset& d, std::span<const std::size_t> rows);
Labels labels_of(const Dataset& d, std::span<const std::size_t> rows);

struct Summary {
  double mean{0.0};
  double sd{0.0}; // n - 1; 0 for a single value
  std::size_t n{0};
};
Summary summarize(std::span<const double> values);

struct MetricSummary {
  Summary accuracy, precision, recall, f1;
  std::optional<TTest> t_test; // on accuracies, when there are >= 2 folds
};

struct FoldResult {
  std::size_t index{0};
  std::vector<std::string> test_participants;
  Metrics overall;
  std::optional<Metrics> baseline;
  std::optional<Metrics> airborne;
};

struct ParticipantResult {
  std::string participant_id;
  std::size_t n_samples{0};
  Metrics metrics;
};

struct EvalReport {
  Modality modality{Modality::eeg};
  ClassifierKind classifier{ClassifierKind::random_forest};
  Strategy strategy{Strategy::grouped_cv};
  std::size_t n_samples{0};
  std::vector<std::string> participants;
  std::vector<FoldResult> folds;
  MetricSummary overall;
  MetricSummary baseline; // folds restricted to baseline-environment windows
  MetricSummary airborne; // straight-and-level and 2G windows
  std::vector<ParticipantResult> per_participant;
  DatasetStats dataset_stats;

  nlohmann::json to_json() const;
};

struct EvalConfig {
  std::size_t k{5};
  std::uint64_t seed{11};
};

// Plans folds, trains and tests one model per fold and aggregates.
// per_participant_cv runs a separate k-fold plan inside every participant.
EvalReport evaluate_dataset(const Dataset& d, ClassifierKind classifier, Strategy strategy, const LearnConfig& learn,
                            const EvalConfig& cfg);

struct ExperimentConfig {
  PreprocessConfig preprocess{};
  FeatureConfig features{};
  DatasetConfig dataset{};
  LearnConfig learn{};
  EvalConfig eval{};
};

EvalReport run_experiment(std::span<const SessionBundle> bundles, Modality modality, ClassifierKind classifier,
                          Strategy strategy, const ExperimentConfig& cfg);

} // namespace errsense
