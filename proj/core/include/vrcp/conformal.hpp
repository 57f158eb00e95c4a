#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vrcp {

/// Q_{1-alpha} of the calibration distribution
///   F = delta_inf/(n+1) + sum_i delta_{s_i}/(n+1).
/// The atom at infinity is carried as a flag, never as a float infinity.
class CriticalValue {
 public:
  static CriticalValue finite(double value, double alpha, std::size_t n);
  static CriticalValue infinite(double alpha, std::size_t n);

  bool is_infinite() const noexcept { return infinite_; }
  /// Only meaningful when !is_infinite().
  double value() const noexcept { return value_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t n() const noexcept { return n_; }

  /// score <= q, with every finite score admitted by the infinite value.
  bool admits(double score) const noexcept { return infinite_ || score <= value_; }

  bool operator==(const CriticalValue&) const = default;

 private:
  double value_ = 0.0;
  bool infinite_ = false;
  double alpha_ = 0.0;
  std::size_t n_ = 0;
};

/// Order-statistic index k = ceil((1 - alpha)(n + 1)), at least 1.
std::size_t conformal_rank(std::size_t n, double alpha);

/// k-th smallest score (stable order), or the infinite value when k > n.
/// Throws DomainError for an empty score list or alpha outside (0,1).
CriticalValue conformal_quantile(std::span<const double> scores, double alpha);

/// 1 - probs[y]
double score_class(std::span<const double> probs, std::size_t label);

/// max(q_lo - y, y - q_hi); negative iff y lies strictly inside (q_lo, q_hi).
double score_cqr(double q_lo, double q_hi, double y) noexcept;

/// Label set with sorted, unique members.
struct PredictionSet {
  std::vector<std::size_t> labels;
  std::size_t num_classes = 0;

  bool contains(std::size_t y) const noexcept;
  std::size_t size() const noexcept { return labels.size(); }
  bool operator==(const PredictionSet&) const = default;
};

/// Closed interval [lower, upper]; `empty` when lower > upper.
struct PredictionInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool empty = false;
  bool unbounded = false;  // built from an infinite critical value

  bool contains(double y) const noexcept;
  /// Width; 0 for an empty interval, +inf when unbounded.
  double length() const noexcept;
  bool operator==(const PredictionInterval&) const = default;
};

/// {y : score(y) <= q} for per-label scores.
PredictionSet set_from_scores(std::span<const double> scores, const CriticalValue& q);

/// {y : 1 - probs[y] <= q}
PredictionSet vanilla_set_class(std::span<const double> probs, const CriticalValue& q);

/// [q_lo - q, q_hi + q]
PredictionInterval cqr_interval(double q_lo, double q_hi, const CriticalValue& q);

}  // namespace vrcp
