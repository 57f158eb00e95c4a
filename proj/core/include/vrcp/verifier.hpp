#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vrcp/network.hpp"
#include "vrcp/tensor.hpp"

namespace vrcp {

/// {x : ||x - center||_p <= radius}
struct PerturbationBall {
  Vector center;
  double radius = 0.0;
  Norm norm = Norm::linf;

  /// Throws DomainError for a negative/non-finite radius or a non-finite center.
  PerturbationBall(Vector center, double radius, Norm norm);
};

enum class BoundMethod { ibp, crown };

const char* to_string(BoundMethod method) noexcept;
BoundMethod parse_bound_method(std::string_view text);

struct Box {
  Vector lower;
  Vector upper;
};

/// Sound coordinatewise bounds of a network's image of a ball.
struct OutputBounds {
  Vector lower;
  Vector upper;
  BoundMethod method = BoundMethod::ibp;
  PerturbationBall ball;
};

/// Interval of every activation layer's input, as produced by IBP.
/// `layer_index[k]` is the position in the network of the k-th activation.
struct PreActivationBounds {
  std::vector<std::size_t> layer_index;
  std::vector<Box> boxes;
};

// All bound functions refuse networks containing softmax (ConfigError): bound
// `net.logits()` and convert with softmax_bounds.

/// Interval bound propagation. The affine layers before the first activation
/// consume the ball exactly through the dual norm of the composed map; later
/// layers use interval arithmetic with the
/// same summation order as `forward`, so at radius 0 the bounds equal the
/// forward pass bit for bit.
OutputBounds ibp_bounds(const Network& net, const PerturbationBall& ball);

PreActivationBounds preactivation_bounds(const Network& net, const PerturbationBall& ball);

/// Backward linear relaxation (CROWN) with IBP pre-activation intervals.
/// The result is intersected with the IBP box, so it is never looser than IBP
/// in any coordinate.
OutputBounds crown_bounds(const Network& net, const PerturbationBall& ball);

OutputBounds compute_bounds(const Network& net, const PerturbationBall& ball, BoundMethod method);

struct ProbabilityBounds {
  Vector lower;
  Vector upper;
};

/// Tight per-label softmax bounds over the logit box [lower, upper]:
///   upper_y = softmax(l with l_y := u_y)_y,  lower_y = softmax(u with u_y := l_y)_y
ProbabilityBounds softmax_bounds(std::span<const double> logit_lower,
                                 std::span<const double> logit_upper);

struct SoundnessViolation {
  std::size_t sample = 0;
  std::size_t output = 0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct SoundnessReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;
  std::optional<SoundnessViolation> first;

  bool sound() const noexcept { return violations == 0; }
};

/// Relative slack granted to floating-point rounding when comparing a sampled
/// output against its bound: |excess| <= tol * (1 + |bound|) is not reported.
inline constexpr double kSoundnessTolerance = 1e-12;

/// Evaluates `net` at `n_samples` uniform points of `bounds.ball` plus the 2d
/// axis extreme points center +- radius * e_i, and reports every output that
/// escapes [lower, upper].
SoundnessReport sampling_soundness_oracle(const Network& net, const OutputBounds& bounds,
                                          std::size_t n_samples, std::uint64_t seed,
                                          double tolerance = kSoundnessTolerance);

}  // namespace vrcp
