#include "vrcp/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrcp/error.hpp"

namespace vrcp {

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::affine: return "affine";
    case LayerKind::relu: return "relu";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

Layer Layer::affine(Matrix w, Vector b) {
  Layer l;
  l.kind = LayerKind::affine;
  l.weight = std::move(w);
  l.bias = std::move(b);
  return l;
}

Layer Layer::relu() { return Layer{}; }

Layer Layer::leaky_relu(double slope) {
  Layer l;
  l.kind = LayerKind::leaky_relu;
  l.slope = slope;
  return l;
}

Layer Layer::softmax() {
  Layer l;
  l.kind = LayerKind::softmax;
  return l;
}

Network::Network(std::size_t input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network must have at least one layer");
  if (input_dim_ == 0) throw ShapeError("network input dimension must be positive");
  dims_.reserve(layers_.size() + 1);
  dims_.push_back(input_dim_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::size_t in = dims_.back();
    const std::string where = "layer " + std::to_string(i);
    switch (l.kind) {
      case LayerKind::affine:
        if (l.weight.cols() != in)
          throw ShapeError(where + ": weight has " + std::to_string(l.weight.cols()) +
                           " columns but receives " + std::to_string(in) + " inputs");
        if (l.weight.rows() == 0 || l.bias.size() != l.weight.rows())
          throw ShapeError(where + ": bias length does not match weight rows");
        if (!all_finite(l.weight.data()) || !all_finite(l.bias))
          throw DomainError(where + ": non-finite parameter");
        dims_.push_back(l.weight.rows());
        break;
      case LayerKind::leaky_relu:
        if (!(l.slope > 0.0 && l.slope < 1.0))
          throw DomainError(where + ": leaky slope must lie in (0,1)");
        dims_.push_back(in);
        break;
      case LayerKind::softmax:
        if (i + 1 != layers_.size()) throw ConfigError(where + ": softmax must be the final layer");
        dims_.push_back(in);
        break;
      case LayerKind::relu:
        dims_.push_back(in);
        break;
    }
  }
}

bool Network::has_softmax_output() const noexcept {
  return layers_.back().kind == LayerKind::softmax;
}

Network Network::logits() const {
  if (!has_softmax_output()) return *this;
  if (layers_.size() == 1) throw ConfigError("network consists of a softmax only");
  return Network(input_dim_, std::vector<Layer>(layers_.begin(), layers_.end() - 1));
}

Network Network::with_parameters(const std::vector<Matrix>& weights,
                                 const std::vector<Vector>& biases) const {
  std::vector<Layer> layers = layers_;
  std::size_t k = 0;
  for (Layer& l : layers) {
    if (l.kind != LayerKind::affine) continue;
    if (k >= weights.size() || k >= biases.size())
      throw ShapeError("with_parameters: too few parameter tensors");
    if (weights[k].rows() != l.weight.rows() || weights[k].cols() != l.weight.cols() ||
        biases[k].size() != l.bias.size())
      throw ShapeError("with_parameters: parameter shape changed");
    l.weight = weights[k];
    l.bias = biases[k];
    ++k;
  }
  if (k != weights.size() || k != biases.size())
    throw ShapeError("with_parameters: too many parameter tensors");
  return Network(input_dim_, std::move(layers));
}

Vector softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  Vector out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

Vector apply_layer(const Layer& layer, std::span<const double> x) {
  switch (layer.kind) {
    case LayerKind::affine:
      return affine(layer.weight, x, layer.bias);
    case LayerKind::relu: {
      Vector y(x.begin(), x.end());
      for (double& v : y) v = v > 0.0 ? v : 0.0;
      return y;
    }
    case LayerKind::leaky_relu: {
      Vector y(x.begin(), x.end());
      for (double& v : y) v = v > 0.0 ? v : layer.slope * v;
      return y;
    }
    case LayerKind::softmax:
      return softmax(x);
  }
  return {};
}

namespace {

Vector run(const Network& net, std::span<const double> x, std::size_t n_layers) {
  if (x.size() != net.input_dim())
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.input_dim()));
  if (!all_finite(x)) throw DomainError("non-finite network input");
  Vector h(x.begin(), x.end());
  for (std::size_t i = 0; i < n_layers; ++i) h = apply_layer(net.layers()[i], h);
  return h;
}

}  // namespace

Vector forward(const Network& net, std::span<const double> x) {
  return run(net, x, net.size());
}

Vector forward_logits(const Network& net, std::span<const double> x) {
  return run(net, x, net.has_softmax_output() ? net.size() - 1 : net.size());
}

}  // namespace vrcp
