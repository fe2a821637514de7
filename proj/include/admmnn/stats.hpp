#pragma once

#include <span>
#include <string>
#include <vector>

namespace admmnn {

struct RunSummary {
  std::string method;
  std::vector<double> accuracies;
  double mean = 0.0;
  /// Sample standard deviation (n - 1 denominator); 0 for a single run.
  double std = 0.0;
  /// Set when std is undefined (fewer than two values).
  bool degenerate = false;
};

RunSummary summarize(std::string method, std::vector<double> accuracies);

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_sided = 1.0;
  double ci99_lo = 0.0;
  double ci99_hi = 0.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

/// Unequal-variance two-sample t-test with Welch-Satterthwaite degrees of
/// freedom and a 99% confidence interval for mean(a) - mean(b).
///
/// When both samples have zero variance the statistic is degenerate: t = 0
/// and p = 1 if the means agree, otherwise t = +/-inf and p = 0; df falls
/// back to n_a + n_b - 2.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
double student_t_cdf(double t, double df);
/// Inverse of student_t_cdf for p in (0, 1).
double student_t_quantile(double p, double df);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double sample_std(std::span<const double> v);

}  // namespace admmnn
