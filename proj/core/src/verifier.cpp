#include "vrcp/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vrcp/error.hpp"
#include "vrcp/random.hpp"

namespace vrcp {

PerturbationBall::PerturbationBall(Vector c, double r, Norm p)
    : center(std::move(c)), radius(r), norm(p) {
  if (!(radius >= 0.0) || !std::isfinite(radius))
    throw DomainError("perturbation radius must be finite and non-negative");
  if (!all_finite(center)) throw DomainError("perturbation center must be finite");
}

const char* to_string(BoundMethod method) noexcept {
  return method == BoundMethod::ibp ? "ibp" : "crown";
}

BoundMethod parse_bound_method(std::string_view text) {
  if (text == "ibp") return BoundMethod::ibp;
  if (text == "crown") return BoundMethod::crown;
  throw ConfigError("unknown verifier '" + std::string(text) + "' (expected ibp or crown)");
}

namespace {

void check(const Network& net, const PerturbationBall& ball) {
  for (const Layer& l : net.layers())
    if (l.kind == LayerKind::softmax)
      throw ConfigError("verifier bounds logits only; strip the softmax layer first");
  if (ball.center.size() != net.input_dim())
    throw ShapeError("ball center has dimension " + std::to_string(ball.center.size()) +
                     ", network expects " + std::to_string(net.input_dim()));
}

Box ball_to_box(const PerturbationBall& ball) {
  Box b{ball.center, ball.center};
  for (std::size_t i = 0; i < ball.center.size(); ++i) {
    b.lower[i] -= ball.radius;
    b.upper[i] += ball.radius;
  }
  return b;
}

// Image of the ball under the leading run of affine layers, kept symbolic as
// x -> A x + c. The center is evaluated layer by layer like `forward`; the
// spread uses the composed map, which is exact for any norm.
struct AffineBall {
  Matrix composed;
  Vector center;
  bool started = false;

  void push(const Layer& l, const PerturbationBall& ball) {
    composed = started ? multiply(l.weight, composed) : l.weight;
    center = affine(l.weight, started ? std::span<const double>(center) : std::span<const double>(ball.center),
                    l.bias);
    started = true;
  }

  Box box(const PerturbationBall& ball) const {
    Box out{center, center};
    const Norm q = dual(ball.norm);
    for (std::size_t r = 0; r < composed.rows(); ++r) {
      const double spread = ball.radius * lp_norm(composed.row(r), q);
      out.lower[r] -= spread;
      out.upper[r] += spread;
    }
    return out;
  }
};

// Interval image of a box. Each partial sum is monotone in the endpoints, so
// the float result brackets the float forward pass of every point in the box.
Box affine_of_box(const Layer& l, const Box& in) {
  const std::size_t rows = l.weight.rows();
  Box out{Vector(rows), Vector(rows)};
  for (std::size_t r = 0; r < rows; ++r) {
    const auto w = l.weight.row(r);
    double lo = 0.0;
    double hi = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) {
      if (w[c] >= 0.0) {
        lo += w[c] * in.lower[c];
        hi += w[c] * in.upper[c];
      } else {
        lo += w[c] * in.upper[c];
        hi += w[c] * in.lower[c];
      }
    }
    out.lower[r] = lo + l.bias[r];
    out.upper[r] = hi + l.bias[r];
  }
  return out;
}

Box activation_of_box(const Layer& l, Box box) {
  box.lower = apply_layer(l, box.lower);
  box.upper = apply_layer(l, box.upper);
  return box;
}

Box propagate(const Network& net, const PerturbationBall& ball, PreActivationBounds* pre) {
  check(net, ball);
  AffineBall head;
  bool in_head = true;
  Box box;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Layer& l = net.layers()[i];
    if (l.kind == LayerKind::affine) {
      if (in_head) {
        head.push(l, ball);
      } else {
        box = affine_of_box(l, box);
      }
      continue;
    }
    if (in_head) {
      box = head.started ? head.box(ball) : ball_to_box(ball);
      in_head = false;
    }
    if (pre != nullptr) {
      pre->layer_index.push_back(i);
      pre->boxes.push_back(box);
    }
    box = activation_of_box(l, std::move(box));
  }
  if (in_head) box = head.box(ball);
  return box;
}

struct Relaxation {
  double upper_slope, upper_intercept;
  double lower_slope, lower_intercept;
};

// Linear bounds lower_slope*x + lower_intercept <= act(x) <= upper_slope*x + upper_intercept
// on [l, u] for act(x) = max(x, a*x), a in [0,1).
Relaxation relax(double l, double u, double a) {
  if (u <= 0.0) return {a, 0.0, a, 0.0};
  if (l >= 0.0) return {1.0, 0.0, 1.0, 0.0};
  const double s = (u - a * l) / (u - l);
  const double lower = u >= -l ? 1.0 : a;
  return {s, l * (a - s), lower, 0.0};
}

// Linear form coef * x + bias, one row per network output.
struct LinearForm {
  Matrix coef;
  Vector bias;
};

void through_affine(LinearForm& f, const Layer& l) {
  for (std::size_t k = 0; k < f.coef.rows(); ++k) f.bias[k] += dot(f.coef.row(k), l.bias);
  f.coef = multiply(f.coef, l.weight);
}

void through_activation(LinearForm& f, const std::vector<Relaxation>& rel, bool upper) {
  for (std::size_t k = 0; k < f.coef.rows(); ++k) {
    auto row = f.coef.row(k);
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double c = row[j];
      // Upper form: positive coefficients take the upper line; lower form the reverse.
      const bool use_upper = (c >= 0.0) == upper;
      const Relaxation& r = rel[j];
      row[j] = c * (use_upper ? r.upper_slope : r.lower_slope);
      f.bias[k] += c * (use_upper ? r.upper_intercept : r.lower_intercept);
    }
  }
}

}  // namespace

OutputBounds ibp_bounds(const Network& net, const PerturbationBall& ball) {
  Box b = propagate(net, ball, nullptr);
  return {std::move(b.lower), std::move(b.upper), BoundMethod::ibp, ball};
}

PreActivationBounds preactivation_bounds(const Network& net, const PerturbationBall& ball) {
  PreActivationBounds pre;
  propagate(net, ball, &pre);
  return pre;
}

OutputBounds crown_bounds(const Network& net, const PerturbationBall& ball) {
  PreActivationBounds pre;
  Box ibp = propagate(net, ball, &pre);
  OutputBounds out{ibp.lower, ibp.upper, BoundMethod::crown, ball};
  // A point ball has exact IBP bounds.
  if (ball.radius == 0.0) return out;

  const std::size_t m = net.output_dim();
  LinearForm up{Matrix::identity(m), Vector(m, 0.0)};
  LinearForm lo = up;
  std::size_t act = pre.boxes.size();
  for (std::size_t i = net.size(); i-- > 0;) {
    const Layer& l = net.layers()[i];
    if (l.kind == LayerKind::affine) {
      through_affine(up, l);
      through_affine(lo, l);
      continue;
    }
    const Box& box = pre.boxes[--act];
    const double a = l.kind == LayerKind::leaky_relu ? l.slope : 0.0;
    std::vector<Relaxation> rel(box.lower.size());
    for (std::size_t j = 0; j < rel.size(); ++j) rel[j] = relax(box.lower[j], box.upper[j], a);
    through_activation(up, rel, true);
    through_activation(lo, rel, false);
  }

  const Norm q = dual(ball.norm);
  for (std::size_t k = 0; k < m; ++k) {
    const double hi = dot(up.coef.row(k), ball.center) + up.bias[k] +
                      ball.radius * lp_norm(up.coef.row(k), q);
    const double low = dot(lo.coef.row(k), ball.center) + lo.bias[k] -
                       ball.radius * lp_norm(lo.coef.row(k), q);
    const double new_lo = std::max(low, ibp.lower[k]);
    const double new_hi = std::min(hi, ibp.upper[k]);
    // Rounding can cross the two forms on near-degenerate boxes; IBP wins then.
    if (new_lo <= new_hi) {
      out.lower[k] = new_lo;
      out.upper[k] = new_hi;
    }
  }
  return out;
}

OutputBounds compute_bounds(const Network& net, const PerturbationBall& ball, BoundMethod method) {
  return method == BoundMethod::ibp ? ibp_bounds(net, ball) : crown_bounds(net, ball);
}

ProbabilityBounds softmax_bounds(std::span<const double> logit_lower,
                                 std::span<const double> logit_upper) {
  if (logit_lower.size() != logit_upper.size() || logit_lower.empty())
    throw ShapeError("softmax_bounds: lower and upper differ in length");
  if (!all_finite(logit_lower) || !all_finite(logit_upper))
    throw DomainError("softmax_bounds: non-finite logit bound");
  for (std::size_t i = 0; i < logit_lower.size(); ++i)
    if (logit_lower[i] > logit_upper[i]) throw DomainError("softmax_bounds: lower exceeds upper");

  const std::size_t k = logit_lower.size();
  ProbabilityBounds out{Vector(k), Vector(k)};
  Vector best(logit_lower.begin(), logit_lower.end());
  Vector worst(logit_upper.begin(), logit_upper.end());
  for (std::size_t y = 0; y < k; ++y) {
    best[y] = logit_upper[y];
    out.upper[y] = softmax(best)[y];
    best[y] = logit_lower[y];
    worst[y] = logit_lower[y];
    out.lower[y] = softmax(worst)[y];
    worst[y] = logit_upper[y];
  }
  return out;
}

SoundnessReport sampling_soundness_oracle(const Network& net, const OutputBounds& bounds,
                                          std::size_t n_samples, std::uint64_t seed,
                                          double tolerance) {
  const PerturbationBall& ball = bounds.ball;
  const std::size_t d = ball.center.size();
  Rng rng(seed);
  SoundnessReport report;
  auto inspect = [&](const Vector& x) {
    const Vector y = forward(net, x);
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double below = bounds.lower[k] - y[k];
      const double above = y[k] - bounds.upper[k];
      const double excess = std::max(below - tolerance * (1.0 + std::abs(bounds.lower[k])),
                                     above - tolerance * (1.0 + std::abs(bounds.upper[k])));
      if (excess > 0.0) {
        if (report.violations == 0)
          report.first = SoundnessViolation{report.samples, k, y[k], bounds.lower[k], bounds.upper[k]};
        ++report.violations;
        report.max_excess = std::max(report.max_excess, std::max(below, above));
      }
    }
    ++report.samples;
  };
  for (std::size_t i = 0; i < d; ++i)
    for (double sign : {-1.0, 1.0}) {
      Vector x = ball.center;
      x[i] += sign * ball.radius;
      inspect(x);
    }
  for (std::size_t s = 0; s < n_samples; ++s) inspect(sample_ball(rng, ball.center, ball.radius, ball.norm));
  return report;
}

}  // namespace vrcp
