#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "vrcp/error.hpp"
#include "vrcp/random.hpp"
#include "vrcp/robust.hpp"

namespace vrcp {
namespace {

constexpr BoundMethod kMethods[] = {BoundMethod::ibp, BoundMethod::crown};

Network classifier(oracle::Engine& rng) {
  return oracle::random_network(rng, {4, 8, 8, 3}, LayerKind::relu, 0.1, true, 2.0);
}

TEST(RobustClass, ZeroRadiusMatchesVanilla) {
  oracle::Engine rng(51);
  const Network net = classifier(rng);
  for (int t = 0; t < 1000; ++t) {
    const Vector x = oracle::random_vector(rng, 4, -1, 1);
    const CriticalValue q = CriticalValue::finite(oracle::draw(rng, 0.0, 1.0), 0.1, 100);
    const PredictionSet plain = vanilla_set_class(forward(net, x), q);
    for (BoundMethod m : kMethods) {
      ASSERT_EQ(vrcp_i_set_class(net, PerturbationBall(x, 0.0, Norm::linf), q, m), plain);
      ASSERT_EQ(worst_case_score_class(net, PerturbationBall(x, 0.0, Norm::l2), t % 3, m),
                score_class(forward(net, x), t % 3));
    }
  }
}

TEST(RobustClass, CalibrationAtZeroRadiusIsVanilla) {
  oracle::Engine rng(52);
  const Network net = classifier(rng);
  std::vector<Vector> xs;
  std::vector<std::size_t> ys;
  std::vector<double> scores;
  for (int i = 0; i < 200; ++i) {
    xs.push_back(oracle::random_vector(rng, 4, -1, 1));
    ys.push_back(rng() % 3);
    scores.push_back(score_class(forward(net, xs.back()), ys.back()));
  }
  for (BoundMethod m : kMethods)
    EXPECT_EQ(vrcp_c_calibrate_class(net, xs, ys, 0.0, Norm::linf, m, 0.1), conformal_quantile(scores, 0.1));
}

TEST(RobustClass, RobustCriticalValueDominates) {
  oracle::Engine rng(53);
  const Network net = classifier(rng);
  std::vector<Vector> xs;
  std::vector<std::size_t> ys;
  std::vector<double> scores;
  for (int i = 0; i < 200; ++i) {
    xs.push_back(oracle::random_vector(rng, 4, -1, 1));
    ys.push_back(rng() % 3);
    scores.push_back(score_class(forward(net, xs.back()), ys.back()));
  }
  const CriticalValue q = conformal_quantile(scores, 0.1);
  for (BoundMethod m : kMethods)
    for (double eps : {0.01, 0.05, 0.2}) {
      const CriticalValue qr = vrcp_c_calibrate_class(net, xs, ys, eps, Norm::linf, m, 0.1);
      EXPECT_GE(qr.value(), q.value());
    }
}

// Every set produced at a point of the ball lies inside the robust set built
// from the ball around the observed point, and worst-case scores dominate.
TEST(RobustClass, SampledPerturbationsStayInside) {
  oracle::Engine rng(54);
  Rng sampler(54);
  for (int t = 0; t < 40; ++t) {
    const Network net = classifier(rng);
    const Vector x = oracle::random_vector(rng, 4, -1, 1);
    const Norm norm = t % 3 == 0 ? Norm::l1 : t % 3 == 1 ? Norm::l2 : Norm::linf;
    const PerturbationBall ball(x, 0.15, norm);
    const CriticalValue q = CriticalValue::finite(oracle::draw(rng, 0.3, 0.9), 0.1, 100);
    for (BoundMethod m : kMethods) {
      const PredictionSet robust = vrcp_i_set_class(net, ball, q, m);
      std::vector<double> worst(3);
      for (std::size_t y = 0; y < 3; ++y) worst[y] = worst_case_score_class(net, ball, y, m);
      for (int s = 0; s < 300; ++s) {
        const Vector xp = sample_ball(sampler, x, ball.radius, norm);
        const Vector p = forward(net, xp);
        ASSERT_TRUE(is_subset(vanilla_set_class(p, q), robust));
        for (std::size_t y = 0; y < 3; ++y) ASSERT_LE(score_class(p, y), worst[y] + 1e-12);
      }
    }
  }
}

TEST(RobustClass, IbpSetsGrowWithRadius) {
  oracle::Engine rng(55);
  const Network net = classifier(rng);
  const CriticalValue q = CriticalValue::finite(0.6, 0.1, 100);
  for (int t = 0; t < 100; ++t) {
    const Vector x = oracle::random_vector(rng, 4, -1, 1);
    PredictionSet prev = vrcp_i_set_class(net, PerturbationBall(x, 0.0, Norm::linf), q, BoundMethod::ibp);
    for (double eps : {0.01, 0.03, 0.1, 0.3, 1.0}) {
      const PredictionSet cur = vrcp_i_set_class(net, PerturbationBall(x, eps, Norm::linf), q, BoundMethod::ibp);
      ASSERT_TRUE(is_subset(prev, cur)) << describe(prev) << " vs " << describe(cur);
      prev = cur;
    }
  }
}

TEST(RobustClass, InfiniteCriticalValueGivesFullSet) {
  oracle::Engine rng(56);
  const Network net = classifier(rng);
  const PredictionSet s = vrcp_i_set_class(net, PerturbationBall(Vector(4, 0.0), 0.1, Norm::linf),
                                           CriticalValue::infinite(0.1, 3), BoundMethod::crown);
  EXPECT_EQ(s.size(), 3u);
}

TEST(RobustClass, BestCaseScoresFromSoftmaxBounds) {
  oracle::Engine rng(57);
  const Network net = classifier(rng);
  const PerturbationBall ball(oracle::random_vector(rng, 4, -1, 1), 0.1, Norm::linf);
  const OutputBounds lb = compute_bounds(net.logits(), ball, BoundMethod::ibp);
  const Vector s = best_case_scores_class(net, ball, BoundMethod::ibp);
  for (std::size_t y = 0; y < 3; ++y) {
    Vector z = lb.lower;
    z[y] = lb.upper[y];
    EXPECT_NEAR(s[y], 1.0 - oracle::naive_softmax(z)[y], 1e-12);
  }
}

struct QuantileNets {
  Network lo;
  Network hi;
};

QuantileNets quantile_nets(oracle::Engine& rng) {
  Network lo = oracle::random_network(rng, {3, 6, 1});
  Network hi = oracle::random_network(rng, {3, 6, 1});
  return {std::move(lo), std::move(hi)};
}

TEST(RobustRegress, ZeroRadiusMatchesVanilla) {
  oracle::Engine rng(61);
  for (int t = 0; t < 200; ++t) {
    const auto [lo, hi] = quantile_nets(rng);
    const Vector x = oracle::random_vector(rng, 3, -1, 1);
    const CriticalValue q = CriticalValue::finite(oracle::draw(rng, -0.2, 1.0), 0.1, 100);
    const PredictionInterval plain = cqr_interval(forward(lo, x)[0], forward(hi, x)[0], q);
    const double y = oracle::draw(rng, -2, 2);
    for (BoundMethod m : kMethods) {
      const PerturbationBall ball(x, 0.0, Norm::l2);
      ASSERT_EQ(vrcp_i_interval_regress(lo, hi, ball, q, m), plain);
      ASSERT_EQ(worst_case_score_cqr(lo, hi, ball, y, m), score_cqr(forward(lo, x)[0], forward(hi, x)[0], y));
    }
  }
}

TEST(RobustRegress, SampledPerturbationsStayInside) {
  oracle::Engine rng(62);
  Rng sampler(62);
  for (int t = 0; t < 40; ++t) {
    const auto [lo, hi] = quantile_nets(rng);
    const Vector x = oracle::random_vector(rng, 3, -1, 1);
    const PerturbationBall ball(x, 0.1, t % 2 ? Norm::l2 : Norm::linf);
    const CriticalValue q = CriticalValue::finite(oracle::draw(rng, 0.0, 0.5), 0.1, 100);
    const double y = oracle::draw(rng, -2, 2);
    for (BoundMethod m : kMethods) {
      const PredictionInterval robust = vrcp_i_interval_regress(lo, hi, ball, q, m);
      const double worst = worst_case_score_cqr(lo, hi, ball, y, m);
      for (int s = 0; s < 300; ++s) {
        const Vector xp = sample_ball(sampler, x, ball.radius, ball.norm);
        const double flo = forward(lo, xp)[0];
        const double fhi = forward(hi, xp)[0];
        ASSERT_TRUE(is_subset(cqr_interval(flo, fhi, q), robust));
        ASSERT_LE(score_cqr(flo, fhi, y), worst + 1e-12);
      }
    }
  }
}

// y is in the robust interval exactly when the best-case score at y passes.
TEST(RobustRegress, IntervalEqualsScoreTestOnGrid) {
  oracle::Engine rng(63);
  for (int t = 0; t < 100; ++t) {
    const auto [lo, hi] = quantile_nets(rng);
    const PerturbationBall ball(oracle::random_vector(rng, 3, -1, 1), 0.05, Norm::linf);
    const CriticalValue q = CriticalValue::finite(oracle::draw(rng, -0.3, 0.5), 0.1, 100);
    const BoundMethod m = kMethods[t % 2];
    const OutputBounds blo = compute_bounds(lo, ball, m);
    const OutputBounds bhi = compute_bounds(hi, ball, m);
    const PredictionInterval iv = vrcp_i_interval_regress(lo, hi, ball, q, m);
    for (double y = -5.00017; y < 5; y += 1e-3) {
      const double best = std::max(blo.lower[0] - y, y - bhi.upper[0]);
      ASSERT_EQ(iv.contains(y), best <= q.value()) << "y=" << y;
    }
  }
}

TEST(RobustRegress, CalibrationAtZeroRadiusIsVanilla) {
  oracle::Engine rng(64);
  const auto [lo, hi] = quantile_nets(rng);
  std::vector<Vector> xs;
  std::vector<double> ys;
  std::vector<double> scores;
  for (int i = 0; i < 150; ++i) {
    xs.push_back(oracle::random_vector(rng, 3, -1, 1));
    ys.push_back(oracle::draw(rng, -1, 1));
    scores.push_back(score_cqr(forward(lo, xs.back())[0], forward(hi, xs.back())[0], ys.back()));
  }
  for (BoundMethod m : kMethods) {
    EXPECT_EQ(vrcp_c_calibrate_regress(lo, hi, xs, ys, 0.0, Norm::linf, m, 0.1), conformal_quantile(scores, 0.1));
    EXPECT_GE(vrcp_c_calibrate_regress(lo, hi, xs, ys, 0.1, Norm::linf, m, 0.1).value(),
              conformal_quantile(scores, 0.1).value());
  }
}

TEST(Containment, DetectsEachKindOfViolation) {
  const std::vector<PredictionSet> vanilla{{{0, 1}, 3}, {{2}, 3}, {{}, 3}};
  std::vector<PredictionSet> robust{{{0, 1, 2}, 3}, {{2}, 3}, {{}, 3}};
  EXPECT_TRUE(containment_check(vanilla, robust).holds());
  robust[1] = {{0, 1}, 3};
  const ContainmentReport r = containment_check(vanilla, robust);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].point, 1u);
  EXPECT_EQ(r.checked, 3u);
  EXPECT_NE(r.violations[0].detail.find("{2}"), std::string::npos);
  EXPECT_THROW(containment_check(vanilla, std::span<const PredictionSet>(robust).first(2)), ShapeError);
}

TEST(Containment, Intervals) {
  const PredictionInterval a{0, 1};
  const PredictionInterval b{-0.5, 1.5};
  const PredictionInterval e{2, 1, true};
  const PredictionInterval u{0, 0, false, true};
  EXPECT_TRUE(is_subset(a, b));
  EXPECT_FALSE(is_subset(b, a));
  EXPECT_TRUE(is_subset(e, a));
  EXPECT_FALSE(is_subset(a, e));
  EXPECT_TRUE(is_subset(b, u));
  EXPECT_FALSE(is_subset(u, b));
  const std::vector<PredictionInterval> van{a, b};
  const std::vector<PredictionInterval> rob{b, a};
  const ContainmentReport r = containment_check(van, rob);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].point, 1u);
}

// A checker that is handed deliberately shrunken robust sets must notice.
TEST(Containment, CatchesShrunkenRobustSets) {
  oracle::Engine rng(65);
  const Network net = classifier(rng);
  const CriticalValue q = CriticalValue::finite(0.7, 0.1, 100);
  std::vector<PredictionSet> vanilla, robust;
  for (int t = 0; t < 100; ++t) {
    const Vector x = oracle::random_vector(rng, 4, -1, 1);
    vanilla.push_back(vanilla_set_class(forward(net, x), q));
    PredictionSet r = vrcp_i_set_class(net, PerturbationBall(x, 0.05, Norm::linf), q, BoundMethod::crown);
    robust.push_back(r);
  }
  EXPECT_TRUE(containment_check(vanilla, robust).holds());
  std::size_t shrunk = 0;
  for (PredictionSet& r : robust)
    if (!r.labels.empty()) {
      r.labels.pop_back();
      ++shrunk;
    }
  std::size_t expected = 0;
  for (std::size_t i = 0; i < vanilla.size(); ++i) expected += is_subset(vanilla[i], robust[i]) ? 0 : 1;
  EXPECT_GT(shrunk, 0u);
  EXPECT_EQ(containment_check(vanilla, robust).violations.size(), expected);
  EXPECT_GT(expected, 0u);
}

}  // namespace
}  // namespace vrcp
