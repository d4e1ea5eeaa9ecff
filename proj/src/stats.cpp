#include "errsense/stats.hpp"

#include "errsense/error.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/non_central_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>

namespace errsense {

Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.empty()) throw ParameterError("metrics need at least one prediction");
  if (y_true.size() != y_pred.size()) throw ParameterError("label and prediction lengths differ");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i];
    const int p = y_pred[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) throw ParameterError("labels must be 0 or 1");
    if (t == 1 && p == 1) ++tp;
    else if (t == 0 && p == 1) ++fp;
    else if (t == 1 && p == 0) ++fn;
    else ++tn;
  }
  Metrics m;
  m.n = y_true.size();
  m.accuracy = static_cast<double>(tp + tn) / static_cast<double>(m.n);
  if (tp + fp == 0) m.precision_undefined = true;
  else m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn == 0) m.recall_undefined = true;
  else m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (m.precision + m.recall > 0.0) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  if (std::isnan(t)) throw ParameterError("t statistic is NaN");
  return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

TTest t_test_vs_chance(std::span<const double> acc, double mu0) {
  if (acc.size() < 2) throw ParameterError("a t-test needs at least two folds");
  const double n = static_cast<double>(acc.size());
  TTest r;
  for (double a : acc) r.mean += a;
  r.mean /= n;
  double ss = 0.0;
  for (double a : acc) ss += (a - r.mean) * (a - r.mean);
  r.sd = std::sqrt(ss / (n - 1.0));
  if (r.sd <= 1e-15 * std::max(1.0, std::abs(r.mean))) {
    r.zero_variance = true;
    if (std::abs(r.mean - mu0) <= 1e-15) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = r.mean > mu0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
      r.p = 0.0;
    }
    return r;
  }
  r.t = (r.mean - mu0) / (r.sd / std::sqrt(n));
  r.p = student_t_two_sided_p(r.t, n - 1.0);
  return r;
}

namespace {

double noncentral_power(double df1, double df2, double lambda, double alpha) {
  const double crit = boost::math::quantile(boost::math::complement(boost::math::fisher_f(df1, df2), alpha));
  if (lambda <= 0.0) return alpha;
  return boost::math::cdf(boost::math::complement(boost::math::non_central_f(df1, df2, lambda), crit));
}

// Noncentrality at which the F test reaches `power`.
double required_lambda(double df1, double df2, double alpha, double power) {
  double lo = 0.0, hi = 1.0;
  while (noncentral_power(df1, df2, hi, alpha) < power) {
    hi *= 2.0;
    if (hi > 1e7) throw ParameterError("requested power is unreachable");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-10 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (noncentral_power(df1, df2, mid, alpha) < power ? lo : hi) = mid;
  }
  return hi;
}

void check_alpha_power(double alpha, double power) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (!(power > alpha && power < 1.0)) throw ParameterError("power must lie in (alpha, 1)");
}

} // namespace

double anova_power(std::size_t n, const PowerParams& p, double alpha) {
  if (p.conditions < 2) throw ParameterError("ANOVA needs at least two conditions");
  if (n < 2) return 0.0;
  const double m = static_cast<double>(p.conditions);
  const double df1 = m - 1.0;
  const double df2 = (static_cast<double>(n) - 1.0) * (m - 1.0);
  return noncentral_power(df1, df2, static_cast<double>(n) * m * p.effect_f * p.effect_f, alpha);
}

std::size_t power_sample_size(PowerKind kind, const PowerParams& p, double alpha, double power) {
  check_alpha_power(alpha, power);
  if (kind == PowerKind::logistic_or) {
    if (!(p.odds_ratio > 0.0) || p.odds_ratio == 1.0) {
      throw ParameterError("odds ratio of 1 (or non-positive) needs an infinite sample");
    }
    if (!(p.event_rate > 0.0 && p.event_rate < 1.0)) throw ParameterError("event rate must lie in (0, 1)");
    const boost::math::normal z;
    const double za = boost::math::quantile(z, 1.0 - alpha / 2.0);
    const double zb = boost::math::quantile(z, power);
    const double l = std::log(p.odds_ratio);
    const double n = (za + zb) * (za + zb) / (p.event_rate * (1.0 - p.event_rate) * l * l);
    return static_cast<std::size_t>(std::ceil(n - 1e-9));
  }
  if (!(p.effect_f > 0.0)) throw ParameterError("effect size f = 0 needs an infinite sample");
  if (p.conditions < 2) throw ParameterError("ANOVA needs at least two conditions");
  const double m = static_cast<double>(p.conditions);
  auto enough = [&](std::size_t n) {
    const double df2 = (static_cast<double>(n) - 1.0) * (m - 1.0);
    return static_cast<double>(n) * m * p.effect_f * p.effect_f >= required_lambda(m - 1.0, df2, alpha, power);
  };
  // Power grows with n, so search by doubling and then bisect.
  std::size_t lo = 1, hi = 2;
  while (!enough(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > (std::size_t{1} << 30)) throw ParameterError("sample size search did not converge");
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (enough(mid) ? hi : lo) = mid;
  }
  return hi;
}

} // namespace errsense
