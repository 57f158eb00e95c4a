#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vrcp/tensor.hpp"

namespace vrcp {

enum class LayerKind { affine, relu, leaky_relu, softmax };

const char* to_string(LayerKind kind) noexcept;

/// One layer of a feed-forward network. Only affine layers carry parameters;
/// `slope` is only meaningful for leaky_relu.
struct Layer {
  LayerKind kind = LayerKind::relu;
  Matrix weight;
  Vector bias;
  double slope = 0.0;

  static Layer affine(Matrix w, Vector b);
  static Layer relu();
  static Layer leaky_relu(double slope);
  static Layer softmax();

  bool is_activation() const noexcept {
    return kind == LayerKind::relu || kind == LayerKind::leaky_relu;
  }
  bool operator==(const Layer&) const = default;
};

/// An immutable, validated feed-forward network.
///
/// Construction checks that the layer list is non-empty, that every affine
/// layer consumes the dimension produced by its predecessor, that weights are
/// finite, that leaky slopes lie in (0,1) and that softmax only appears as the
/// final layer. Violations throw ShapeError, DomainError or ConfigError.
class Network {
 public:
  Network(std::size_t input_dim, std::vector<Layer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  /// Width entering layer i; dims()[size()] is the output width.
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }

  bool has_softmax_output() const noexcept;
  /// The same network with a trailing softmax removed: the part the verifier
  /// bounds. Returns a copy of *this when there is no softmax.
  Network logits() const;
  /// Replace the parameters of affine layers; shapes must be unchanged.
  Network with_parameters(const std::vector<Matrix>& weights,
                          const std::vector<Vector>& biases) const;

  bool operator==(const Network&) const = default;

 private:
  std::size_t input_dim_;
  std::vector<Layer> layers_;
  std::vector<std::size_t> dims_;
};

/// Numerically stable softmax (max subtracted before exponentiation).
Vector softmax(std::span<const double> logits);

/// Applies one layer. No dimension checks beyond those of `affine`.
Vector apply_layer(const Layer& layer, std::span<const double> x);

/// Evaluates the whole network. Throws ShapeError on a dimension mismatch and
/// DomainError on non-finite input.
Vector forward(const Network& net, std::span<const double> x);

/// Evaluates everything except a trailing softmax.
Vector forward_logits(const Network& net, std::span<const double> x);

}  // namespace vrcp
