#include "vrcp/robust.hpp"

#include <algorithm>
#include <sstream>

#include "vrcp/error.hpp"
#include "vrcp/format.hpp"

namespace vrcp {

namespace {

ProbabilityBounds probability_bounds(const Network& logit_net, const PerturbationBall& ball,
                                     BoundMethod method) {
  const OutputBounds b = compute_bounds(logit_net, ball, method);
  return softmax_bounds(b.lower, b.upper);
}

const Network& single_output(const Network& net, const char* role) {
  if (net.output_dim() != 1 || net.has_softmax_output())
    throw ConfigError(std::string(role) + " quantile network must have a single unnormalized output");
  return net;
}

}  // namespace

Vector best_case_scores_class(const Network& classifier, const PerturbationBall& ball,
                              BoundMethod method) {
  const ProbabilityBounds p = probability_bounds(classifier.logits(), ball, method);
  Vector scores(p.upper.size());
  for (std::size_t y = 0; y < scores.size(); ++y) scores[y] = 1.0 - p.upper[y];
  return scores;
}

PredictionSet vrcp_i_set_class(const Network& classifier, const PerturbationBall& ball,
                               const CriticalValue& q, BoundMethod method) {
  return set_from_scores(best_case_scores_class(classifier, ball, method), q);
}

double worst_case_score_class(const Network& classifier, const PerturbationBall& ball,
                              std::size_t label, BoundMethod method) {
  const ProbabilityBounds p = probability_bounds(classifier.logits(), ball, method);
  if (label >= p.lower.size()) throw DomainError("calibration label out of range");
  return 1.0 - p.lower[label];
}

std::vector<double> worst_case_scores_class(const Network& classifier, std::span<const Vector> inputs,
                                            std::span<const std::size_t> labels, double epsilon,
                                            Norm norm, BoundMethod method) {
  if (inputs.size() != labels.size()) throw ShapeError("calibration inputs and labels differ in length");
  const Network logit_net = classifier.logits();
  std::vector<double> scores(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const ProbabilityBounds p = probability_bounds(logit_net, PerturbationBall(inputs[i], epsilon, norm), method);
    if (labels[i] >= p.lower.size()) throw DomainError("calibration label out of range");
    scores[i] = 1.0 - p.lower[labels[i]];
  }
  return scores;
}

CriticalValue vrcp_c_calibrate_class(const Network& classifier, std::span<const Vector> inputs,
                                     std::span<const std::size_t> labels, double epsilon, Norm norm,
                                     BoundMethod method, double alpha) {
  if (inputs.empty()) throw DomainError("calibration set is empty");
  return conformal_quantile(worst_case_scores_class(classifier, inputs, labels, epsilon, norm, method), alpha);
}

PredictionSet vrcp_c_set_class(std::span<const double> probs, const CriticalValue& robust_q) {
  return vanilla_set_class(probs, robust_q);
}

PredictionInterval vrcp_i_interval_regress(const Network& net_lo, const Network& net_hi,
                                           const PerturbationBall& ball, const CriticalValue& q,
                                           BoundMethod method) {
  const OutputBounds lo = compute_bounds(single_output(net_lo, "low"), ball, method);
  const OutputBounds hi = compute_bounds(single_output(net_hi, "high"), ball, method);
  return cqr_interval(lo.lower[0], hi.upper[0], q);
}

double worst_case_score_cqr(const Network& net_lo, const Network& net_hi,
                            const PerturbationBall& ball, double target, BoundMethod method) {
  const OutputBounds lo = compute_bounds(single_output(net_lo, "low"), ball, method);
  const OutputBounds hi = compute_bounds(single_output(net_hi, "high"), ball, method);
  return score_cqr(lo.upper[0], hi.lower[0], target);
}

std::vector<double> worst_case_scores_cqr(const Network& net_lo, const Network& net_hi,
                                          std::span<const Vector> inputs,
                                          std::span<const double> targets, double epsilon, Norm norm,
                                          BoundMethod method) {
  if (inputs.size() != targets.size()) throw ShapeError("calibration inputs and targets differ in length");
  std::vector<double> scores(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    scores[i] = worst_case_score_cqr(net_lo, net_hi, PerturbationBall(inputs[i], epsilon, norm),
                                     targets[i], method);
  return scores;
}

CriticalValue vrcp_c_calibrate_regress(const Network& net_lo, const Network& net_hi,
                                       std::span<const Vector> inputs, std::span<const double> targets,
                                       double epsilon, Norm norm, BoundMethod method, double alpha) {
  if (inputs.empty()) throw DomainError("calibration set is empty");
  return conformal_quantile(worst_case_scores_cqr(net_lo, net_hi, inputs, targets, epsilon, norm, method),
                            alpha);
}

bool is_subset(const PredictionSet& inner, const PredictionSet& outer) noexcept {
  return std::includes(outer.labels.begin(), outer.labels.end(), inner.labels.begin(),
                       inner.labels.end());
}

bool is_subset(const PredictionInterval& inner, const PredictionInterval& outer) noexcept {
  if (inner.empty) return true;
  if (outer.unbounded) return true;
  if (outer.empty || inner.unbounded) return false;
  return outer.lower <= inner.lower && inner.upper <= outer.upper;
}

namespace {

template <typename Region>
ContainmentReport check_all(std::span<const Region> vanilla, std::span<const Region> robust) {
  if (vanilla.size() != robust.size()) throw ShapeError("containment_check: region lists differ in length");
  ContainmentReport report;
  report.checked = vanilla.size();
  for (std::size_t i = 0; i < vanilla.size(); ++i)
    if (!is_subset(vanilla[i], robust[i]))
      report.violations.push_back({i, "vanilla " + describe(vanilla[i]) + " not within robust " + describe(robust[i])});
  return report;
}

}  // namespace

ContainmentReport containment_check(std::span<const PredictionSet> vanilla,
                                    std::span<const PredictionSet> robust) {
  return check_all(vanilla, robust);
}

ContainmentReport containment_check(std::span<const PredictionInterval> vanilla,
                                    std::span<const PredictionInterval> robust) {
  return check_all(vanilla, robust);
}

std::string describe(const PredictionSet& set) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < set.labels.size(); ++i) os << (i ? "," : "") << set.labels[i];
  os << '}';
  return os.str();
}

std::string describe(const PredictionInterval& interval) {
  if (interval.empty) return "[empty]";
  if (interval.unbounded) return "(-inf,inf)";
  return '[' + format_double(interval.lower) + ',' + format_double(interval.upper) + ']';
}

}  // namespace vrcp
