#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "vrcp/attacks.hpp"
#include "vrcp/autodiff.hpp"
#include "vrcp/conformal.hpp"
#include "vrcp/error.hpp"

namespace vrcp {
namespace {

AttackConfig config(Norm norm, double eps, int steps = 50, double step = 0.01, std::uint64_t seed = 1) {
  AttackConfig c;
  c.norm = norm;
  c.epsilon = eps;
  c.steps = steps;
  c.step_size = step;
  c.seed = seed;
  return c;
}

double linf_distance(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double l2_distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

TEST(ProjectBall, InsideUnchanged) {
  EXPECT_EQ(project_ball(Vector{0.1, 0.2}, Vector{0, 0}, 1.0, Norm::l2), (Vector{0.1, 0.2}));
  EXPECT_EQ(project_ball(Vector{0.1, 0.2}, Vector{0, 0}, 1.0, Norm::linf), (Vector{0.1, 0.2}));
}

TEST(ProjectBall, RadialL2) {
  const Vector p = project_ball(Vector{3, 4}, Vector{0, 0}, 1.0, Norm::l2);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
}

TEST(ProjectBall, ClampLinf) {
  EXPECT_EQ(project_ball(Vector{0.7}, Vector{0}, 0.5, Norm::linf), Vector{0.5});
}

TEST(ProjectBall, IsNearestPoint) {
  oracle::Engine rng(31);
  for (int t = 0; t < 200; ++t) {
    const Vector c = oracle::random_vector(rng, 3, -1, 1);
    const Vector x = oracle::random_vector(rng, 3, -3, 3);
    for (Norm p : {Norm::l2, Norm::linf}) {
      const Vector proj = project_ball(x, c, 0.5, p);
      EXPECT_LE(lp_norm(Vector{proj[0] - c[0], proj[1] - c[1], proj[2] - c[2]}, p), 0.5 + 1e-12);
      // No random point of the ball is closer to x (in l2).
      const double d = l2_distance(proj, x);
      for (int s = 0; s < 20; ++s) {
        Vector q = c;
        for (double& v : q) v += oracle::draw(rng, -0.5, 0.5);
        q = project_ball(q, c, 0.5, p);
        EXPECT_GE(l2_distance(q, x), d - 1e-12);
      }
    }
  }
}

TEST(ProjectBall, L1Rejected) {
  EXPECT_THROW(project_ball(Vector{1}, Vector{0}, 0.5, Norm::l1), ConfigError);
}

TEST(Fgsm, ZeroEpsilonIsIdentity) {
  const Network net(2, {Layer::affine(Matrix{{1, -1}, {-1, 1}}, {0, 0}), Layer::softmax()});
  EXPECT_EQ(fgsm(net, Vector{0.3, 0.1}, 0, config(Norm::linf, 0.0)), (Vector{0.3, 0.1}));
}

TEST(Fgsm, LinearClassifierDirectionByHand) {
  // logits z = (w.x, -w.x), w = [1, -1]. CE on class 0 is log(1 + exp(-2 w.x)),
  // whose gradient is -2 (1 - p0) w: direction sign(-w) = [-1, +1].
  const Network net(2, {Layer::affine(Matrix{{1, -1}, {-1, 1}}, {0, 0}), Layer::softmax()});
  const Vector x{0.3, 0.1};
  const Vector adv = fgsm(net, x, 0, config(Norm::linf, 0.1));
  EXPECT_NEAR(adv[0], 0.2, 1e-15);
  EXPECT_NEAR(adv[1], 0.2, 1e-15);
  const Vector g = grad_input(net, x, Objective::cross_entropy(0));
  const double p0 = oracle::naive_softmax(Vector{0.2, -0.2})[0];
  EXPECT_NEAR(g[0], -2 * (1 - p0), 1e-12);
  EXPECT_NEAR(g[1], 2 * (1 - p0), 1e-12);
}

TEST(Fgsm, FullStepWhenGradientHasNoZeros) {
  oracle::Engine rng(32);
  for (int t = 0; t < 100; ++t) {
    const Network net = oracle::random_network(rng, {4, 6, 3}, LayerKind::leaky_relu, 0.1, true);
    const Vector x = oracle::random_vector(rng, 4, -1, 1);
    const Vector adv = fgsm(net, x, t % 3, config(Norm::linf, 0.07));
    EXPECT_NEAR(linf_distance(adv, x), 0.07, 1e-15);
  }
}

TEST(Fgsm, RequiresLinf) {
  const Network net(2, {Layer::affine(Matrix::identity(2), Vector(2)), Layer::softmax()});
  EXPECT_THROW(fgsm(net, Vector{0, 0}, 0, config(Norm::l2, 0.1)), ConfigError);
}

TEST(Pgd, ZeroEpsilonIsIdentity) {
  const Network net(2, {Layer::affine(Matrix::identity(2), Vector(2)), Layer::softmax()});
  EXPECT_EQ(pgd(net, Vector{0.3, 0.1}, 1, config(Norm::l2, 0.0)), (Vector{0.3, 0.1}));
}

TEST(Pgd, NeverWorseThanCleanPoint) {
  oracle::Engine rng(33);
  for (int t = 0; t < 100; ++t) {
    const Network net = oracle::random_network(rng, {4, 8, 3}, LayerKind::relu, 0.1, true);
    const Vector x = oracle::random_vector(rng, 4, -1, 1);
    const std::size_t y = t % 3;
    const Norm p = t % 2 ? Norm::l2 : Norm::linf;
    const Vector adv = pgd(net, x, y, config(p, 0.1, 10, 0.02, t));
    const Objective obj = Objective::cross_entropy(y);
    EXPECT_GE(objective_value(net, adv, obj), objective_value(net, x, obj));
  }
}

TEST(Pgd, RespectsNormConstraint) {
  oracle::Engine rng(34);
  for (int t = 0; t < 1000; ++t) {
    const Network net = oracle::random_network(rng, {3, 5, 2}, LayerKind::relu, 0.1, true);
    const Vector x = oracle::random_vector(rng, 3, -1, 1);
    const Norm p = t % 2 ? Norm::l2 : Norm::linf;
    const double eps = oracle::draw(rng, 0.0, 0.5);
    const Vector adv = pgd(net, x, t % 2, config(p, eps, 5, eps / 2, t));
    const double dist = p == Norm::l2 ? l2_distance(adv, x) : linf_distance(adv, x);
    EXPECT_LE(dist, eps + 1e-9);
  }
}

TEST(Pgd, LinearModelReachesClosedFormL2) {
  oracle::Engine rng(35);
  for (int t = 0; t < 20; ++t) {
    const Vector w = oracle::random_vector(rng, 5, -1, 1);
    const Vector x = oracle::random_vector(rng, 5, -1, 1);
    const double eps = 0.3;
    const AttackObjective obj = [&](std::span<const double> p) {
      double v = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * p[i];
      return std::make_pair(v, w);
    };
    const Vector adv = pgd(obj, x, config(Norm::l2, eps, 100, eps / 4, t));
    const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + w[3] * w[3] + w[4] * w[4]);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(adv[i], x[i] + eps * w[i] / n, 1e-4);
  }
}

TEST(Attacks, DeterministicGivenSeed) {
  oracle::Engine rng(36);
  const Network net = oracle::random_network(rng, {3, 5, 2}, LayerKind::relu, 0.1, true);
  const Vector x{0.1, 0.2, 0.3};
  EXPECT_EQ(pgd(net, x, 0, config(Norm::l2, 0.2, 10, 0.05, 9)), pgd(net, x, 0, config(Norm::l2, 0.2, 10, 0.05, 9)));
}

TEST(Attacks, ConfigValidation) {
  EXPECT_THROW(config(Norm::l1, 0.1).validate(), ConfigError);
  EXPECT_THROW(config(Norm::l2, -0.1).validate(), DomainError);
  EXPECT_THROW(config(Norm::l2, 0.1, 0).validate(), ConfigError);
  EXPECT_THROW(config(Norm::l2, 0.1, 5, 0.0).validate(), ConfigError);
}

TEST(Attacks, CqrObjectiveIncreasesScore) {
  oracle::Engine rng(37);
  for (int t = 0; t < 50; ++t) {
    const Network lo = oracle::random_network(rng, {3, 6, 1});
    const Network hi = oracle::random_network(rng, {3, 6, 1});
    const Vector x = oracle::random_vector(rng, 3, -1, 1);
    const double y = oracle::draw(rng, -1, 1);
    const Vector adv = fgsm(cqr_objective(lo, hi, y), x, config(Norm::linf, 0.05));
    const double before = score_cqr(forward(lo, x)[0], forward(hi, x)[0], y);
    const Vector best = pgd(cqr_objective(lo, hi, y), x, config(Norm::linf, 0.05, 20, 0.01, t));
    EXPECT_GE(score_cqr(forward(lo, best)[0], forward(hi, best)[0], y), before);
    EXPECT_LE(linf_distance(adv, x), 0.05 + 1e-15);
  }
}

}  // namespace
}  // namespace vrcp
