#pragma once

#include <cstddef>
#include <span>

namespace errsense {

struct Metrics {
  double accuracy{0.0};
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};
  bool precision_undefined{false}; // no predicted errors
  bool recall_undefined{false};    // no true errors
  std::size_t n{0};
};

// Error (label 1) is the positive class. Undefined ratios are reported as 0
// with the matching flag set. ParameterError on empty or unequal input.
Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred);

struct TTest {
  double t{0.0};
  double p{1.0};
  double mean{0.0};
  double sd{0.0};
  bool zero_variance{false};
};

// One-sample two-sided t-test of fold accuracies against mu0.
TTest t_test_vs_chance(std::span<const double> fold_accuracies, double mu0 = 0.5);

// P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

enum class PowerKind { logistic_or, anova_f };

struct PowerParams {
  double odds_ratio{1.5};
  double event_rate{0.5};  // logistic_or
  double effect_f{0.35};   // anova_f
  std::size_t conditions{3};
};

// Smallest sample size meeting the requested power. logistic_or uses the
// normal-predictor formula; anova_f is the one-way repeated-measures model
// with df = (m - 1, (n - 1)(m - 1)) and noncentrality n * m * f^2, the
// required noncentrality found by bisection. ParameterError when the effect
// is null (infinite n) or a parameter is out of range.
std::size_t power_sample_size(PowerKind kind, const PowerParams& params, double alpha = 0.05, double power = 0.80);

// Power of the repeated-measures F test for n subjects.
double anova_power(std::size_t n, const PowerParams& params, double alpha);

} // namespace errsense
