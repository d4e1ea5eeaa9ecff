#include "errsense/error.hpp"
#include "errsense/eval.hpp"
#include "errsense/oracles.hpp"
#include "errsense/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace errsense;

namespace {

Dataset fake(std::size_t participants, std::size_t per_participant, std::size_t features = 3) {
  Dataset d;
  for (std::size_t f = 0; f < features; ++f) d.feature_names.push_back("f" + std::to_string(f));
  for (std::size_t p = 0; p < participants; ++p) {
    for (std::size_t i = 0; i < per_participant; ++i) {
      WindowSample s;
      s.participant_id = "P" + std::to_string(p + 1);
      s.environment = kEnvironments[i % 3];
      s.t_start_s = static_cast<double>(i);
      s.label = i % 2 ? EventKind::error : EventKind::non_error;
      for (std::size_t f = 0; f < features; ++f) {
        s.features.push_back((s.label == EventKind::error ? 3.0 : 0.0) + std::sin(double(i * 7 + f * 3 + p)));
      }
      d.samples.push_back(s);
    }
  }
  return d;
}

std::set<std::string> participants_of(const Dataset& d, const std::vector<std::size_t>& rows) {
  std::set<std::string> s;
  for (auto r : rows) s.insert(d.samples[r].participant_id);
  return s;
}

} // namespace

TEST_CASE("LOPO on nine participants gives nine disjoint folds") {
  const auto d = fake(9, 10);
  const auto plan = plan_folds(d, Strategy::lopo, 5, 1);
  CHECK(plan.folds.size() == 9);
  for (const auto& f : plan.folds) {
    const auto tr = participants_of(d, f.train), te = participants_of(d, f.test);
    CHECK(te.size() == 1);
    for (const auto& p : te) CHECK(tr.count(p) == 0);
  }
  CHECK_NOTHROW(check_fold_plan(d, plan));
}

TEST_CASE("grouped CV partitions nine participants into 2,2,2,2,1") {
  const auto d = fake(9, 10);
  const auto plan = plan_folds(d, Strategy::grouped_cv, 5, 3);
  REQUIRE(plan.folds.size() == 5);
  std::multiset<std::size_t> sizes;
  for (const auto& f : plan.folds) {
    sizes.insert(f.test_participants.size());
    const auto tr = participants_of(d, f.train);
    for (const auto& p : f.test_participants) CHECK(tr.count(p) == 0);
  }
  CHECK(sizes == std::multiset<std::size_t>{1, 2, 2, 2, 2});
  CHECK_NOTHROW(check_fold_plan(d, plan));
  CHECK_THROWS_AS(plan_folds(d, Strategy::grouped_cv, 10, 3), ParameterError);
  CHECK_THROWS_AS(plan_folds(fake(1, 10), Strategy::lopo, 5, 3), ParameterError);
}

TEST_CASE("exhaustive leakage check over many seeds") {
  const auto d = fake(9, 6);
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (Strategy st : {Strategy::grouped_cv, Strategy::lopo}) {
      const auto plan = plan_folds(d, st, 5, s);
      for (const auto& f : plan.folds) {
        const auto tr = participants_of(d, f.train), te = participants_of(d, f.test);
        for (const auto& p : te) REQUIRE(tr.count(p) == 0);
      }
    }
  }
}

TEST_CASE("leakage is detected") {
  const auto d = fake(3, 4);
  FoldPlan bad{Strategy::grouped_cv, {}};
  Fold f;
  f.test = {0, 1};
  f.train = {2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  f.test_participants = {"P1"};
  bad.folds.push_back(f);
  CHECK_THROWS_AS(check_fold_plan(d, bad), InvariantError);
}

TEST_CASE("per-participant CV stratifies by label") {
  const auto d = fake(1, 10);
  const auto plan = plan_folds(d, Strategy::per_participant_cv, 5, 1);
  REQUIRE(plan.folds.size() == 5);
  for (const auto& f : plan.folds) {
    REQUIRE(f.test.size() == 2);
    CHECK(d.samples[f.test[0]].label != d.samples[f.test[1]].label);
  }
  CHECK_THROWS_AS(plan_folds(fake(2, 10), Strategy::per_participant_cv, 5, 1), ParameterError);
}

TEST_CASE("metrics") {
  const std::vector<int> y{1, 0, 1, 0};
  const auto perfect = compute_metrics(y, y);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.f1 == 1.0);
  const auto all_err = compute_metrics(y, std::vector<int>{1, 1, 1, 1});
  CHECK(all_err.accuracy == 0.5);
  CHECK(all_err.precision == 0.5);
  CHECK(all_err.recall == 1.0);
  CHECK(all_err.f1 == doctest::Approx(2.0 / 3.0));
  const auto none = compute_metrics(y, std::vector<int>{0, 0, 0, 0});
  CHECK(none.accuracy == 0.5);
  CHECK(none.precision == 0.0);
  CHECK(none.precision_undefined);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK_THROWS_AS(compute_metrics(std::vector<int>{}, std::vector<int>{}), ParameterError);

  const std::vector<int> yt{1, 1, 0, 0, 1, 0, 1}, yp{1, 0, 0, 1, 1, 0, 0};
  const auto m = compute_metrics(yt, yp);
  CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
}

TEST_CASE("t-test against chance") {
  const auto flat = t_test_vs_chance(std::vector<double>{0.5, 0.5, 0.5});
  CHECK(flat.t == 0.0);
  CHECK(flat.p == 1.0);
  // Mean 0.892, sd 0.01924: t = 0.392 / (0.01924 / sqrt 5) = 45.57.
  const auto r = t_test_vs_chance(std::vector<double>{0.9, 0.88, 0.92, 0.87, 0.89});
  CHECK(r.t == doctest::Approx(45.5691).epsilon(1e-5));
  CHECK(r.p < 1e-5);
  CHECK(r.p == doctest::Approx(1.387e-6).epsilon(1e-3));
  CHECK_THROWS_AS(t_test_vs_chance(std::vector<double>{0.9}), ParameterError);
  const auto z = t_test_vs_chance(std::vector<double>{0.8, 0.8});
  CHECK(z.zero_variance);
  CHECK(z.p == 0.0);
}

TEST_CASE("Student-t p-values match numerical integration") {
  for (double df : {4.0, 8.0, 9.0}) {
    for (double t : {0.0, 0.5, 1.3, 2.2, 3.7, 6.0}) {
      CHECK(std::abs(student_t_two_sided_p(t, df) - oracle::t_two_sided_p(t, df)) < 1e-6);
    }
  }
}

TEST_CASE("power analysis") {
  CHECK(power_sample_size(PowerKind::logistic_or, PowerParams{}) == 191);
  CHECK(power_sample_size(PowerKind::anova_f, PowerParams{}) == 28);

  std::size_t prev = SIZE_MAX;
  for (double orr : {1.5, 2.0, 4.0, 10.0, 100.0}) {
    PowerParams p;
    p.odds_ratio = orr;
    const auto n = power_sample_size(PowerKind::logistic_or, p);
    CHECK(n <= prev);
    prev = n;
  }
  std::size_t last = 0;
  for (double power : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
    const auto n = power_sample_size(PowerKind::anova_f, PowerParams{}, 0.05, power);
    CHECK(n >= last);
    last = n;
  }
  PowerParams null_or;
  null_or.odds_ratio = 1.0;
  CHECK_THROWS_AS(power_sample_size(PowerKind::logistic_or, null_or), ParameterError);
  PowerParams null_f;
  null_f.effect_f = 0.0;
  CHECK_THROWS_AS(power_sample_size(PowerKind::anova_f, null_f), ParameterError);
  const auto n = power_sample_size(PowerKind::anova_f, PowerParams{});
  CHECK(anova_power(n, PowerParams{}, 0.05) >= 0.8);
  CHECK(anova_power(n - 1, PowerParams{}, 0.05) < 0.8);
}

TEST_CASE("evaluation reports one row per participant and is deterministic") {
  const auto d = fake(4, 20);
  LearnConfig learn;
  learn.forest.n_trees = 10;
  const auto a = evaluate_dataset(d, ClassifierKind::random_forest, Strategy::lopo, learn, EvalConfig{});
  const auto b = evaluate_dataset(d, ClassifierKind::random_forest, Strategy::lopo, learn, EvalConfig{});
  CHECK(a.per_participant.size() == 4);
  CHECK(a.folds.size() == 4);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.overall.accuracy.mean > 0.9);
  REQUIRE(a.overall.t_test.has_value());

  const auto pp = evaluate_dataset(d, ClassifierKind::adaboost, Strategy::per_participant_cv, learn, EvalConfig{});
  CHECK(pp.per_participant.size() == 4);
}
