#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vrcp/network.hpp"
#include "vrcp/tensor.hpp"

namespace vrcp {

/// A scalar function of the network output.
///
/// cross_entropy reads the pre-softmax logits (a trailing softmax layer is
/// folded into the loss). logit reads a raw output and is rejected on networks
/// that end in softmax. pinball expects a single output. squared_error and
/// linear read the final output, softmax included.
class Objective {
 public:
  enum class Kind { cross_entropy, pinball, logit, squared_error, linear };

  static Objective cross_entropy(std::size_t label);
  static Objective pinball(double target, double tau);
  static Objective logit(std::size_t index);
  static Objective squared_error(Vector target);
  static Objective linear(Vector coefficients);

  Kind kind() const noexcept { return kind_; }
  std::size_t index() const noexcept { return index_; }
  double target() const noexcept { return target_; }
  double tau() const noexcept { return tau_; }
  const Vector& coefficients() const noexcept { return coefficients_; }

 private:
  Objective() = default;

  Kind kind_ = Kind::linear;
  std::size_t index_ = 0;
  double target_ = 0.0;
  double tau_ = 0.5;
  Vector coefficients_;
};

/// Pinball (quantile) loss of prediction `pred` for target `y` at level tau.
double pinball_loss(double pred, double y, double tau) noexcept;

double objective_value(const Network& net, std::span<const double> x, const Objective& obj);

/// d objective / d x by reverse accumulation through the layer stack.
Vector grad_input(const Network& net, std::span<const double> x, const Objective& obj);

/// Gradients for the affine layers, in layer order, averaged over a batch.
struct ParameterGradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  double mean_loss = 0.0;
};

ParameterGradients grad_params(const Network& net, std::span<const Vector> inputs,
                               std::span<const Objective> objectives);

}  // namespace vrcp
