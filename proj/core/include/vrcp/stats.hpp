#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace vrcp {

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> v);
/// Half-width of the normal-approximation 95% interval: 1.96 * sd / sqrt(n).
double ci95_half_width(std::span<const double> v);
/// sqrt(p (1 - p) / n)
double binomial_se(double p, std::size_t n);

/// P(X = j), j = 0..trials, for X ~ BetaBinomial(trials, a, b).
std::vector<double> beta_binomial_pmf(std::size_t trials, double a, double b);

/// Smallest [lo, hi] with P(X < lo) <= (1 - level)/2 and P(X > hi) <= (1 - level)/2.
std::pair<std::size_t, std::size_t> beta_binomial_band(std::size_t trials, double a, double b, double level);

/// Band for the number of covered test points of split conformal prediction
/// with n calibration points: coverage given calibration is Beta(k, n + 1 - k).
std::pair<std::size_t, std::size_t> conformal_coverage_band(std::size_t n_cal, std::size_t n_test, double alpha,
                                                            double level);

}  // namespace vrcp
