#include "vrcp/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrcp/error.hpp"

namespace vrcp {

Objective Objective::cross_entropy(std::size_t label) {
  Objective o;
  o.kind_ = Kind::cross_entropy;
  o.index_ = label;
  return o;
}

Objective Objective::pinball(double target, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("pinball level must lie in (0,1)");
  if (!std::isfinite(target)) throw DomainError("pinball target must be finite");
  Objective o;
  o.kind_ = Kind::pinball;
  o.target_ = target;
  o.tau_ = tau;
  return o;
}

Objective Objective::logit(std::size_t index) {
  Objective o;
  o.kind_ = Kind::logit;
  o.index_ = index;
  return o;
}

Objective Objective::squared_error(Vector target) {
  Objective o;
  o.kind_ = Kind::squared_error;
  o.coefficients_ = std::move(target);
  return o;
}

Objective Objective::linear(Vector coefficients) {
  Objective o;
  o.kind_ = Kind::linear;
  o.coefficients_ = std::move(coefficients);
  return o;
}

double pinball_loss(double pred, double y, double tau) noexcept {
  const double diff = y - pred;
  return diff >= 0.0 ? tau * diff : (tau - 1.0) * diff;
}

namespace {

// Activations entering each layer; inputs[i] feeds layer i and
// inputs[n_layers] is the output of the evaluated prefix.
struct Trace {
  std::vector<Vector> inputs;
};

Trace record(const Network& net, std::span<const double> x, std::size_t n_layers) {
  if (x.size() != net.input_dim())
    throw ShapeError("input has dimension " + std::to_string(x.size()) + ", network expects " +
                     std::to_string(net.input_dim()));
  if (!all_finite(x)) throw DomainError("non-finite network input");
  Trace t;
  t.inputs.reserve(n_layers + 1);
  t.inputs.emplace_back(x.begin(), x.end());
  for (std::size_t i = 0; i < n_layers; ++i)
    t.inputs.push_back(apply_layer(net.layers()[i], t.inputs.back()));
  return t;
}

// How far to run the forward pass: cross-entropy stops before the softmax.
std::size_t prefix_length(const Network& net, const Objective& obj) {
  const std::size_t out = net.output_dim();
  switch (obj.kind()) {
    case Objective::Kind::cross_entropy:
      if (obj.index() >= out) throw ConfigError("cross-entropy label out of range");
      if (out < 2) throw ConfigError("cross-entropy needs at least two outputs");
      return net.has_softmax_output() ? net.size() - 1 : net.size();
    case Objective::Kind::logit:
      if (net.has_softmax_output())
        throw ConfigError("logit objective reads pre-softmax values; network ends in softmax");
      if (obj.index() >= out) throw ConfigError("logit index out of range");
      return net.size();
    case Objective::Kind::pinball:
      if (net.has_softmax_output()) throw ConfigError("pinball objective on a softmax network");
      if (out != 1) throw ConfigError("pinball objective needs a single output");
      return net.size();
    case Objective::Kind::squared_error:
    case Objective::Kind::linear:
      if (obj.coefficients().size() != out)
        throw ConfigError("objective vector length does not match network output");
      return net.size();
  }
  return net.size();
}

// Value and gradient of the objective with respect to the prefix output.
double seed(const Objective& obj, const Vector& out, Vector& grad) {
  grad.assign(out.size(), 0.0);
  switch (obj.kind()) {
    case Objective::Kind::cross_entropy: {
      const Vector p = softmax(out);
      const double m = *std::max_element(out.begin(), out.end());
      double z = 0.0;
      for (double v : out) z += std::exp(v - m);
      for (std::size_t i = 0; i < out.size(); ++i) grad[i] = p[i];
      grad[obj.index()] -= 1.0;
      return m + std::log(z) - out[obj.index()];
    }
    case Objective::Kind::logit:
      grad[obj.index()] = 1.0;
      return out[obj.index()];
    case Objective::Kind::pinball: {
      const double pred = out[0];
      // At the kink the tau-side (pred < target) derivative is used.
      grad[0] = pred > obj.target() ? 1.0 - obj.tau() : -obj.tau();
      return pinball_loss(pred, obj.target(), obj.tau());
    }
    case Objective::Kind::squared_error: {
      double v = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        grad[i] = out[i] - obj.coefficients()[i];
        v += 0.5 * grad[i] * grad[i];
      }
      return v;
    }
    case Objective::Kind::linear:
      grad = obj.coefficients();
      return dot(obj.coefficients(), out);
  }
  return 0.0;
}

// Walks the recorded prefix backwards. When `params` is non-null the affine
// parameter gradients are accumulated into it (indexed by affine ordinal).
Vector backward(const Network& net, const Trace& trace, std::size_t n_layers, Vector grad,
                ParameterGradients* params) {
  std::size_t affine_index = 0;
  for (std::size_t i = 0; i < n_layers; ++i)
    if (net.layers()[i].kind == LayerKind::affine) ++affine_index;

  for (std::size_t i = n_layers; i-- > 0;) {
    const Layer& layer = net.layers()[i];
    const Vector& in = trace.inputs[i];
    switch (layer.kind) {
      case LayerKind::affine: {
        --affine_index;
        if (params != nullptr) {
          Matrix& gw = params->weights[affine_index];
          Vector& gb = params->biases[affine_index];
          for (std::size_t r = 0; r < gw.rows(); ++r) {
            gb[r] += grad[r];
            auto row = gw.row(r);
            for (std::size_t c = 0; c < gw.cols(); ++c) row[c] += grad[r] * in[c];
          }
        }
        grad = transpose_times(layer.weight, grad);
        break;
      }
      case LayerKind::relu:
        // Subgradient at zero is zero.
        for (std::size_t k = 0; k < grad.size(); ++k)
          if (!(in[k] > 0.0)) grad[k] = 0.0;
        break;
      case LayerKind::leaky_relu:
        for (std::size_t k = 0; k < grad.size(); ++k)
          if (!(in[k] > 0.0)) grad[k] *= layer.slope;
        break;
      case LayerKind::softmax: {
        const Vector& p = trace.inputs[i + 1];
        const double gp = dot(grad, p);
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = p[k] * (grad[k] - gp);
        break;
      }
    }
  }
  return grad;
}

ParameterGradients zero_gradients(const Network& net) {
  ParameterGradients g;
  for (const Layer& l : net.layers()) {
    if (l.kind != LayerKind::affine) continue;
    g.weights.emplace_back(l.weight.rows(), l.weight.cols());
    g.biases.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

}  // namespace

double objective_value(const Network& net, std::span<const double> x, const Objective& obj) {
  const std::size_t n = prefix_length(net, obj);
  const Vector out = n == net.size() ? forward(net, x) : forward_logits(net, x);
  Vector unused;
  return seed(obj, out, unused);
}

Vector grad_input(const Network& net, std::span<const double> x, const Objective& obj) {
  const std::size_t n = prefix_length(net, obj);
  const Trace trace = record(net, x, n);
  Vector g;
  seed(obj, trace.inputs.back(), g);
  return backward(net, trace, n, std::move(g), nullptr);
}

ParameterGradients grad_params(const Network& net, std::span<const Vector> inputs,
                               std::span<const Objective> objectives) {
  if (inputs.size() != objectives.size())
    throw ShapeError("grad_params: inputs and objectives differ in length");
  if (inputs.empty()) throw ShapeError("grad_params: empty batch");
  ParameterGradients total = zero_gradients(net);
  double loss = 0.0;
  for (std::size_t s = 0; s < inputs.size(); ++s) {
    const std::size_t n = prefix_length(net, objectives[s]);
    const Trace trace = record(net, inputs[s], n);
    Vector g;
    loss += seed(objectives[s], trace.inputs.back(), g);
    backward(net, trace, n, std::move(g), &total);
  }
  const double scale = 1.0 / static_cast<double>(inputs.size());
  for (Matrix& w : total.weights)
    for (double& v : w.data()) v *= scale;
  for (Vector& b : total.biases)
    for (double& v : b) v *= scale;
  total.mean_loss = loss * scale;
  return total;
}

}  // namespace vrcp
