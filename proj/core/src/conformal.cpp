#include "vrcp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vrcp/error.hpp"

namespace vrcp {

CriticalValue CriticalValue::finite(double value, double alpha, std::size_t n) {
  CriticalValue q;
  q.value_ = value;
  q.alpha_ = alpha;
  q.n_ = n;
  return q;
}

CriticalValue CriticalValue::infinite(double alpha, std::size_t n) {
  CriticalValue q;
  q.infinite_ = true;
  q.alpha_ = alpha;
  q.n_ = n;
  return q;
}

std::size_t conformal_rank(std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  const double target = (1.0 - alpha) * static_cast<double>(n + 1);
  // Absorb representation error so that e.g. 0.9 * 10 yields 9, not 10.
  const double k = std::ceil(target - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

CriticalValue conformal_quantile(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw DomainError("conformal_quantile: empty score list");
  for (double s : scores)
    if (!std::isfinite(s)) throw DomainError("conformal_quantile: non-finite score");
  const std::size_t n = scores.size();
  const std::size_t k = conformal_rank(n, alpha);
  if (k > n) return CriticalValue::infinite(alpha, n);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return CriticalValue::finite(sorted[k - 1], alpha, n);
}

double score_class(std::span<const double> probs, std::size_t label) {
  if (label >= probs.size())
    throw DomainError("label " + std::to_string(label) + " out of range for " +
                      std::to_string(probs.size()) + " classes");
  return 1.0 - probs[label];
}

double score_cqr(double q_lo, double q_hi, double y) noexcept {
  return std::max(q_lo - y, y - q_hi);
}

bool PredictionSet::contains(std::size_t y) const noexcept {
  return std::binary_search(labels.begin(), labels.end(), y);
}

bool PredictionInterval::contains(double y) const noexcept {
  return !empty && lower <= y && y <= upper;
}

double PredictionInterval::length() const noexcept {
  if (empty) return 0.0;
  if (unbounded) return std::numeric_limits<double>::infinity();
  return upper - lower;
}

PredictionSet set_from_scores(std::span<const double> scores, const CriticalValue& q) {
  PredictionSet set;
  set.num_classes = scores.size();
  for (std::size_t y = 0; y < scores.size(); ++y)
    if (q.admits(scores[y])) set.labels.push_back(y);
  return set;
}

PredictionSet vanilla_set_class(std::span<const double> probs, const CriticalValue& q) {
  std::vector<double> scores(probs.size());
  for (std::size_t y = 0; y < probs.size(); ++y) scores[y] = score_class(probs, y);
  return set_from_scores(scores, q);
}

PredictionInterval cqr_interval(double q_lo, double q_hi, const CriticalValue& q) {
  PredictionInterval iv;
  if (q.is_infinite()) {
    iv.lower = -std::numeric_limits<double>::infinity();
    iv.upper = std::numeric_limits<double>::infinity();
    iv.unbounded = true;
    return iv;
  }
  iv.lower = q_lo - q.value();
  iv.upper = q_hi + q.value();
  iv.empty = iv.lower > iv.upper;
  return iv;
}

}  // namespace vrcp
