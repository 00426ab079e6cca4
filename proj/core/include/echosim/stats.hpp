#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace echosim {

struct SampleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  /// Sample standard deviation (n - 1); 0 for a single value.
  double stddev = 0.0;
  /// t-based 95% half-width with n - 1 degrees of freedom; absent for n < 2.
  std::optional<double> ci95;
};

SampleSummary summarize(std::span<const double> values);

/// Two-sided Welch t-test p-value; absent when either side has fewer than two
/// values. Identical constant samples give p = 1.
std::optional<double> welch_t_test(std::span<const double> a, std::span<const double> b);

/// One-sided Welch p-value for mean(a) > mean(b).
std::optional<double> welch_t_test_greater(std::span<const double> a, std::span<const double> b);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Upper-tail chi-squared probability.
double chi_squared_sf(double statistic, double dof);

}  // namespace echosim
