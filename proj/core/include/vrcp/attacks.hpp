#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "vrcp/network.hpp"
#include "vrcp/tensor.hpp"

namespace vrcp {

struct AttackConfig {
  Norm norm = Norm::linf;
  double epsilon = 0.0;
  int steps = 100;
  double step_size = 1.0 / 255.0;
  bool random_start = true;
  std::uint64_t seed = 0;

  /// Throws ConfigError/DomainError. l1 attacks are not supported.
  void validate() const;
};

/// Adversarial objective to maximize: returns (value, gradient) at x.
using AttackObjective = std::function<std::pair<double, Vector>(std::span<const double>)>;

/// Cross-entropy of the true label (monotone in the score 1 - p_y).
AttackObjective classification_objective(const Network& classifier, std::size_t label);

/// CQR score max(lo(x) - y, y - hi(x)) at the true target.
AttackObjective cqr_objective(const Network& net_lo, const Network& net_hi, double target);

/// Nearest point of the ball: clamp for l_inf, radial rescale for l2.
Vector project_ball(std::span<const double> x, std::span<const double> center, double epsilon,
                    Norm norm);

/// One signed-gradient step of size epsilon (l_inf only).
Vector fgsm(const AttackObjective& objective, std::span<const double> x, const AttackConfig& cfg);

/// Projected gradient ascent. Steps follow sign(g) for l_inf and g/||g||_2 for
/// l2. The clean input competes with every iterate; the best one is returned.
Vector pgd(const AttackObjective& objective, std::span<const double> x, const AttackConfig& cfg);

Vector fgsm(const Network& classifier, std::span<const double> x, std::size_t label,
            const AttackConfig& cfg);
Vector pgd(const Network& classifier, std::span<const double> x, std::size_t label,
           const AttackConfig& cfg);

}  // namespace vrcp
