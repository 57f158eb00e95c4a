#include "vrcp/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "vrcp/autodiff.hpp"
#include "vrcp/error.hpp"
#include "vrcp/random.hpp"

namespace vrcp {

void AttackConfig::validate() const {
  if (norm == Norm::l1) throw ConfigError("attacks support the l2 and l_inf norms only");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("attack epsilon must be >= 0");
  if (steps < 1) throw ConfigError("attack needs at least one step");
  if (!(step_size > 0.0)) throw ConfigError("attack step size must be positive");
}

AttackObjective classification_objective(const Network& classifier, std::size_t label) {
  return [&classifier, label](std::span<const double> x) {
    const Objective obj = Objective::cross_entropy(label);
    return std::make_pair(objective_value(classifier, x, obj), grad_input(classifier, x, obj));
  };
}

AttackObjective cqr_objective(const Network& net_lo, const Network& net_hi, double target) {
  return [&net_lo, &net_hi, target](std::span<const double> x) {
    const double lo = forward(net_lo, x)[0];
    const double hi = forward(net_hi, x)[0];
    if (lo - target >= target - hi)
      return std::make_pair(lo - target, grad_input(net_lo, x, Objective::logit(0)));
    Vector g = grad_input(net_hi, x, Objective::logit(0));
    for (double& v : g) v = -v;
    return std::make_pair(target - hi, std::move(g));
  };
}

Vector project_ball(std::span<const double> x, std::span<const double> center, double epsilon,
                    Norm norm) {
  if (x.size() != center.size()) throw ShapeError("project_ball: dimension mismatch");
  Vector out(x.begin(), x.end());
  switch (norm) {
    case Norm::linf:
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], center[i] - epsilon, center[i] + epsilon);
      return out;
    case Norm::l2: {
      Vector delta(out.size());
      for (std::size_t i = 0; i < out.size(); ++i) delta[i] = out[i] - center[i];
      const double n = lp_norm(delta, Norm::l2);
      if (n <= epsilon) return out;
      const double scale = epsilon / n;
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = center[i] + delta[i] * scale;
      return out;
    }
    case Norm::l1:
      break;
  }
  throw ConfigError("project_ball supports the l2 and l_inf norms only");
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

Vector fgsm(const AttackObjective& objective, std::span<const double> x, const AttackConfig& cfg) {
  cfg.validate();
  if (cfg.norm != Norm::linf) throw ConfigError("FGSM is defined for the l_inf norm");
  Vector out(x.begin(), x.end());
  if (cfg.epsilon == 0.0) return out;
  const Vector g = objective(x).second;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += cfg.epsilon * sign(g[i]);
  return project_ball(out, x, cfg.epsilon, Norm::linf);
}

Vector pgd(const AttackObjective& objective, std::span<const double> x, const AttackConfig& cfg) {
  cfg.validate();
  Vector best(x.begin(), x.end());
  if (cfg.epsilon == 0.0) return best;
  double best_value = objective(x).first;

  Vector cur = best;
  if (cfg.random_start) {
    Rng rng(cfg.seed);
    cur = project_ball(sample_ball(rng, x, cfg.epsilon, cfg.norm), x, cfg.epsilon, cfg.norm);
  }
  for (int step = 0; step <= cfg.steps; ++step) {
    auto [value, g] = objective(cur);
    if (value > best_value) {
      best_value = value;
      best = cur;
    }
    if (step == cfg.steps) break;
    if (cfg.norm == Norm::linf) {
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += cfg.step_size * sign(g[i]);
    } else {
      const double n = lp_norm(g, Norm::l2);
      if (n == 0.0) break;
      for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += cfg.step_size * g[i] / n;
    }
    cur = project_ball(cur, x, cfg.epsilon, cfg.norm);
  }
  return best;
}

Vector fgsm(const Network& classifier, std::span<const double> x, std::size_t label,
            const AttackConfig& cfg) {
  return fgsm(classification_objective(classifier, label), x, cfg);
}

Vector pgd(const Network& classifier, std::span<const double> x, std::size_t label,
           const AttackConfig& cfg) {
  return pgd(classification_objective(classifier, label), x, cfg);
}

}  // namespace vrcp
