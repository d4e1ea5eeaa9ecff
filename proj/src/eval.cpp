#include "errsense/eval.hpp"

#include "errsense/error.hpp"
#include "errsense/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace errsense {

using nlohmann::json;

namespace {

bool airborne(Environment e) { return e != Environment::baseline; }

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& test) {
  std::vector<char> in_test(n, 0);
  for (std::size_t i : test) in_test[i] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!in_test[i]) out.push_back(i);
  }
  return out;
}

FoldPlan plan_by_groups(const Dataset& d, const std::vector<std::vector<std::string>>& groups, Strategy s) {
  std::map<std::string, std::size_t> group_of;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& p : groups[g]) group_of[p] = g;
  }
  FoldPlan plan;
  plan.strategy = s;
  plan.folds.resize(groups.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) plan.folds[group_of.at(d.samples[i].participant_id)].test.push_back(i);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    plan.folds[g].test_participants = groups[g];
    std::sort(plan.folds[g].test_participants.begin(), plan.folds[g].test_participants.end());
    plan.folds[g].train = complement(d.samples.size(), plan.folds[g].test);
  }
  return plan;
}

json metrics_json(const Metrics& m) {
  return {{"accuracy", 100.0 * m.accuracy},
          {"precision", 100.0 * m.precision},
          {"recall", 100.0 * m.recall},
          {"f1", 100.0 * m.f1},
          {"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined},
          {"n", m.n}};
}

json summary_json(const Summary& s) { return {{"mean", 100.0 * s.mean}, {"sd", 100.0 * s.sd}, {"n_folds", s.n}}; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json metric_summary_json(const MetricSummary& m) {
  json j = {{"accuracy", summary_json(m.accuracy)},
            {"precision", summary_json(m.precision)},
            {"recall", summary_json(m.recall)},
            {"f1", summary_json(m.f1)}};
  if (m.t_test) {
    j["t_statistic"] = finite_or_null(m.t_test->t);
    j["p_value"] = m.t_test->p;
    j["zero_variance"] = m.t_test->zero_variance;
  } else {
    j["t_statistic"] = nullptr;
    j["p_value"] = nullptr;
  }
  return j;
}

MetricSummary summarize_metrics(const std::vector<Metrics>& ms) {
  std::vector<double> a, p, r, f;
  for (const auto& m : ms) {
    a.push_back(m.accuracy);
    p.push_back(m.precision);
    r.push_back(m.recall);
    f.push_back(m.f1);
  }
  MetricSummary s;
  s.accuracy = summarize(a);
  s.precision = summarize(p);
  s.recall = summarize(r);
  s.f1 = summarize(f);
  if (a.size() >= 2) s.t_test = t_test_vs_chance(a);
  return s;
}

} // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
  case Strategy::per_participant_cv: return "per_participant_cv";
  case Strategy::grouped_cv: return "grouped_cv";
  case Strategy::lopo: return "lopo";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "per_participant_cv") return Strategy::per_participant_cv;
  if (s == "grouped_cv") return Strategy::grouped_cv;
  if (s == "lopo") return Strategy::lopo;
  throw FormatError("unknown strategy '" + std::string(s) + "'");
}

FoldPlan plan_folds(const Dataset& d, Strategy strategy, std::size_t k, std::uint64_t seed) {
  const auto participants = d.participants();
  Rng rng(seed);
  switch (strategy) {
  case Strategy::per_participant_cv: {
    if (participants.size() != 1) throw ParameterError("per-participant CV needs a single-participant dataset");
    if (k < 2 || k > d.samples.size()) throw ParameterError("k must lie in [2, number of samples]");
    std::vector<std::size_t> err, non;
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      (d.samples[i].label == EventKind::error ? err : non).push_back(i);
    }
    rng.shuffle(err);
    rng.shuffle(non);
    FoldPlan plan;
    plan.strategy = strategy;
    plan.folds.resize(k);
    for (std::size_t j = 0; j < err.size(); ++j) plan.folds[j % k].test.push_back(err[j]);
    for (std::size_t j = 0; j < non.size(); ++j) plan.folds[(err.size() + j) % k].test.push_back(non[j]);
    for (auto& f : plan.folds) {
      std::sort(f.test.begin(), f.test.end());
      f.train = complement(d.samples.size(), f.test);
      f.test_participants = participants;
    }
    return plan;
  }
  case Strategy::grouped_cv: {
    if (participants.size() < 2) throw ParameterError("grouped CV needs at least two participants");
    if (k < 2) throw ParameterError("k must be at least 2");
    if (k > participants.size()) {
      throw ParameterError("k = " + std::to_string(k) + " exceeds the " + std::to_string(participants.size()) +
                           " participants");
    }
    auto order = participants;
    rng.shuffle(order);
    std::vector<std::vector<std::string>> groups(k);
    for (std::size_t i = 0; i < order.size(); ++i) groups[i % k].push_back(order[i]);
    return plan_by_groups(d, groups, strategy);
  }
  case Strategy::lopo: {
    if (participants.size() < 2) throw ParameterError("LOPO needs at least two participants");
    std::vector<std::vector<std::string>> groups;
    for (const auto& p : participants) groups.push_back({p});
    return plan_by_groups(d, groups, strategy);
  }
  }
  throw ParameterError("unknown strategy");
}

void check_fold_plan(const Dataset& d, const FoldPlan& plan) {
  std::vector<std::size_t> seen(d.samples.size(), 0);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const Fold& fold = plan.folds[f];
    for (std::size_t i : fold.test) ++seen.at(i);
    if (plan.strategy == Strategy::per_participant_cv) continue;
    std::set<std::string> train_ids;
    for (std::size_t i : fold.train) train_ids.insert(d.samples.at(i).participant_id);
    for (std::size_t i : fold.test) {
      if (train_ids.count(d.samples[i].participant_id)) {
        throw InvariantError("fold " + std::to_string(f) + " has participant " + d.samples[i].participant_id +
                             " in both train and test");
      }
    }
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (seen[i] != 1) {
      throw InvariantError("sample " + std::to_string(i) + " is tested " + std::to_string(seen[i]) + " times");
    }
  }
}

Matrix design_matrix(const Dataset& d, std::span<const std::size_t> rows) {
  Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.feature_names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = d.samples.at(rows[r]).features;
    if (f.size() != d.feature_names.size()) throw SchemaError("sample feature count differs from the dataset's");
    for (std::size_t c = 0; c < f.size(); ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f[c];
  }
  return X;
}

Labels labels_of(const Dataset& d, std::span<const std::size_t> rows) {
  Labels y;
  y.reserve(rows.size());
  for (std::size_t i : rows) y.push_back(d.samples.at(i).label == EventKind::error ? 1 : 0);
  return y;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

TrainedModel train_model(ClassifierKind kind, const Matrix& X, const Labels& y, std::span<const std::string> names,
                         const LearnConfig& cfg, std::uint64_t seed) {
  switch (kind) {
  case ClassifierKind::random_forest: return train_random_forest(X, y, names, cfg.forest, seed);
  case ClassifierKind::adaboost: return train_adaboost(X, y, names, cfg.adaboost, seed);
  case ClassifierKind::mlp: return train_mlp(X, y, names, cfg.mlp, seed);
  }
  throw ParameterError("unknown classifier");
}

EvalReport evaluate_dataset(const Dataset& d, ClassifierKind classifier, Strategy strategy, const LearnConfig& learn,
                            const EvalConfig& cfg) {
  check_balance(d);
  EvalReport rep;
  rep.modality = d.modality;
  rep.classifier = classifier;
  rep.strategy = strategy;
  rep.n_samples = d.samples.size();
  rep.participants = d.participants();
  rep.dataset_stats = d.stats;

  FoldPlan plan;
  plan.strategy = strategy;
  if (strategy == Strategy::per_participant_cv) {
    for (const auto& p : rep.participants) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < d.samples.size(); ++i) {
        if (d.samples[i].participant_id == p) idx.push_back(i);
      }
      const Dataset sub = d.subset(idx);
      const FoldPlan local = plan_folds(sub, strategy, cfg.k, derive_seed(cfg.seed, p));
      for (const Fold& f : local.folds) {
        Fold g;
        g.test_participants = f.test_participants;
        for (std::size_t i : f.train) g.train.push_back(idx[i]);
        for (std::size_t i : f.test) g.test.push_back(idx[i]);
        plan.folds.push_back(std::move(g));
      }
    }
  } else {
    plan = plan_folds(d, strategy, cfg.k, cfg.seed);
  }
  check_fold_plan(d, plan);

  std::vector<int> predicted(d.samples.size(), -1);
  std::vector<Metrics> overall, base, air;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const Fold& fold = plan.folds[f];
    const Matrix Xtr = design_matrix(d, fold.train);
    const Labels ytr = labels_of(d, fold.train);
    const TrainedModel model = train_model(classifier, Xtr, ytr, d.feature_names, learn, derive_seed(cfg.seed, f));
    const Matrix Xte = design_matrix(d, fold.test);
    const Labels yte = labels_of(d, fold.test);
    const Prediction pred = predict(model, Xte, d.feature_names);

    FoldResult fr;
    fr.index = f;
    fr.test_participants = fold.test_participants;
    fr.overall = compute_metrics(yte, pred.labels);
    Labels bt, bp, at, ap;
    for (std::size_t k = 0; k < fold.test.size(); ++k) {
      predicted[fold.test[k]] = pred.labels[k];
      const bool air_env = airborne(d.samples[fold.test[k]].environment);
      (air_env ? at : bt).push_back(yte[k]);
      (air_env ? ap : bp).push_back(pred.labels[k]);
    }
    overall.push_back(fr.overall);
    if (!bt.empty()) {
      fr.baseline = compute_metrics(bt, bp);
      base.push_back(*fr.baseline);
    }
    if (!at.empty()) {
      fr.airborne = compute_metrics(at, ap);
      air.push_back(*fr.airborne);
    }
    rep.folds.push_back(std::move(fr));
  }
  rep.overall = summarize_metrics(overall);
  rep.baseline = summarize_metrics(base);
  rep.airborne = summarize_metrics(air);

  for (const auto& p : rep.participants) {
    Labels t, q;
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
      if (d.samples[i].participant_id != p) continue;
      t.push_back(d.samples[i].label == EventKind::error ? 1 : 0);
      q.push_back(predicted[i]);
    }
    rep.per_participant.push_back({p, t.size(), compute_metrics(t, q)});
  }
  return rep;
}

EvalReport run_experiment(std::span<const SessionBundle> bundles, Modality modality, ClassifierKind classifier,
                          Strategy strategy, const ExperimentConfig& cfg) {
  const Dataset d = build_dataset(bundles, modality, cfg.preprocess, cfg.features, cfg.dataset);
  return evaluate_dataset(d, classifier, strategy, cfg.learn, cfg.eval);
}

json EvalReport::to_json() const {
  json j;
  j["modality"] = std::string(errsense::to_string(modality));
  j["classifier"] = std::string(errsense::to_string(classifier));
  j["strategy"] = std::string(errsense::to_string(strategy));
  j["n_samples"] = n_samples;
  j["participants"] = participants;
  j["overall"] = metric_summary_json(overall);
  j["baseline"] = metric_summary_json(baseline);
  j["airborne"] = metric_summary_json(airborne);
  j["folds"] = json::array();
  for (const auto& f : folds) {
    json fj = {{"index", f.index}, {"test_participants", f.test_participants}, {"overall", metrics_json(f.overall)}};
    fj["baseline"] = f.baseline ? metrics_json(*f.baseline) : json(nullptr);
    fj["airborne"] = f.airborne ? metrics_json(*f.airborne) : json(nullptr);
    j["folds"].push_back(std::move(fj));
  }
  j["per_participant"] = json::array();
  for (const auto& p : per_participant) {
    j["per_participant"].push_back(
        {{"participant_id", p.participant_id}, {"n_samples", p.n_samples}, {"metrics", metrics_json(p.metrics)}});
  }
  j["dataset"] = {{"error_events", dataset_stats.error_events},
                  {"error_out_of_span", dataset_stats.error_out_of_span},
                  {"error_flagged", dataset_stats.error_flagged},
                  {"non_error_redrawn", dataset_stats.non_error_redrawn},
                  {"skipped_sessions", dataset_stats.skipped_sessions}};
  return j;
}

} // namespace errsense
