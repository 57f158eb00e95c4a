#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vrcp/conformal.hpp"
#include "vrcp/network.hpp"
#include "vrcp/verifier.hpp"

namespace vrcp {

// Robust conformal regions from verified output bounds.
//
// Robust inference (VRCP-I) keeps the vanilla critical value and replaces the
// test score by a lower bound over the ball around the (possibly perturbed)
// test input. Robust calibration (VRCP-C) replaces each calibration score by
// an upper bound over the ball around the calibration input and scores test
// points as usual.
//
// Classifiers may end in softmax: bounds are taken on the logits and mapped
// through softmax_bounds.

/// s_lo(x, y) = 1 - upper softmax bound of label y, for every label at once.
Vector best_case_scores_class(const Network& classifier, const PerturbationBall& ball,
                              BoundMethod method);

PredictionSet vrcp_i_set_class(const Network& classifier, const PerturbationBall& ball,
                               const CriticalValue& q, BoundMethod method);

/// s_hi(x, y) = 1 - lower softmax bound of label y.
double worst_case_score_class(const Network& classifier, const PerturbationBall& ball,
                              std::size_t label, BoundMethod method);

std::vector<double> worst_case_scores_class(const Network& classifier, std::span<const Vector> inputs,
                                            std::span<const std::size_t> labels, double epsilon,
                                            Norm norm, BoundMethod method);

/// Critical value of the worst-case calibration distribution.
CriticalValue vrcp_c_calibrate_class(const Network& classifier, std::span<const Vector> inputs,
                                     std::span<const std::size_t> labels, double epsilon, Norm norm,
                                     BoundMethod method, double alpha);

/// Plain scores against the robust critical value.
PredictionSet vrcp_c_set_class(std::span<const double> probs, const CriticalValue& robust_q);

/// [lower bound of net_lo - q, upper bound of net_hi + q] over the ball.
PredictionInterval vrcp_i_interval_regress(const Network& net_lo, const Network& net_hi,
                                           const PerturbationBall& ball, const CriticalValue& q,
                                           BoundMethod method);

/// max(upper(net_lo) - y, y - lower(net_hi)) over the ball.
double worst_case_score_cqr(const Network& net_lo, const Network& net_hi,
                            const PerturbationBall& ball, double target, BoundMethod method);

std::vector<double> worst_case_scores_cqr(const Network& net_lo, const Network& net_hi,
                                          std::span<const Vector> inputs,
                                          std::span<const double> targets, double epsilon, Norm norm,
                                          BoundMethod method);

CriticalValue vrcp_c_calibrate_regress(const Network& net_lo, const Network& net_hi,
                                       std::span<const Vector> inputs, std::span<const double> targets,
                                       double epsilon, Norm norm, BoundMethod method, double alpha);

bool is_subset(const PredictionSet& inner, const PredictionSet& outer) noexcept;
bool is_subset(const PredictionInterval& inner, const PredictionInterval& outer) noexcept;

struct ContainmentViolation {
  std::size_t point = 0;
  std::string detail;
};

/// Result of checking vanilla region subset-of robust region point by point.
struct ContainmentReport {
  std::size_t checked = 0;
  std::vector<ContainmentViolation> violations;

  bool holds() const noexcept { return violations.empty(); }
};

ContainmentReport containment_check(std::span<const PredictionSet> vanilla,
                                    std::span<const PredictionSet> robust);
ContainmentReport containment_check(std::span<const PredictionInterval> vanilla,
                                    std::span<const PredictionInterval> robust);

std::string describe(const PredictionSet& set);
std::string describe(const PredictionInterval& interval);

}  // namespace vrcp
