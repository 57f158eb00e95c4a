#include "vrcp/stats.hpp"

#include <cmath>
#include <numeric>

#include "vrcp/conformal.hpp"
#include "vrcp/error.hpp"

namespace vrcp {

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double ci95_half_width(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return 1.96 * sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

double binomial_se(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

std::vector<double> beta_binomial_pmf(std::size_t trials, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("beta-binomial shape parameters must be positive");
  const double n = static_cast<double>(trials);
  const double log_beta_ab = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  std::vector<double> pmf(trials + 1);
  for (std::size_t j = 0; j <= trials; ++j) {
    const double k = static_cast<double>(j);
    const double log_choose = std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
    const double log_beta = std::lgamma(k + a) + std::lgamma(n - k + b) - std::lgamma(n + a + b);
    pmf[j] = std::exp(log_choose + log_beta - log_beta_ab);
  }
  return pmf;
}

std::pair<std::size_t, std::size_t> beta_binomial_band(std::size_t trials, double a, double b, double level) {
  const std::vector<double> pmf = beta_binomial_pmf(trials, a, b);
  const double tail = (1.0 - level) / 2.0;
  std::size_t lo = 0;
  double below = 0.0;
  while (lo < trials && below + pmf[lo] <= tail) below += pmf[lo++];
  std::size_t hi = trials;
  double above = 0.0;
  while (hi > lo && above + pmf[hi] <= tail) above += pmf[hi--];
  return {lo, hi};
}

std::pair<std::size_t, std::size_t> conformal_coverage_band(std::size_t n_cal, std::size_t n_test, double alpha,
                                                            double level) {
  const std::size_t k = conformal_rank(n_cal, alpha);
  if (k > n_cal) return {n_test, n_test};
  return beta_binomial_band(n_test, static_cast<double>(k), static_cast<double>(n_cal + 1 - k), level);
}

}  // namespace vrcp
