#pragma once

// Reference implementations used by the tests. They avoid the library code
// paths they are compared against.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "vrcp/network.hpp"
#include "vrcp/tensor.hpp"

namespace vrcp::oracle {

using Engine = std::mt19937_64;

double draw(Engine& rng, double lo, double hi);
Vector random_vector(Engine& rng, std::size_t n, double lo, double hi);
Matrix random_matrix(Engine& rng, std::size_t rows, std::size_t cols, double scale);

/// MLP with layer widths `dims` (input first) and `act` between affine layers.
Network random_network(Engine& rng, const std::vector<std::size_t>& dims, LayerKind act = LayerKind::relu,
                       double slope = 0.1, bool softmax = false, double scale = 1.0);
/// A stack of affine layers only.
Network random_affine_network(Engine& rng, const std::vector<std::size_t>& dims, double scale = 1.0);

/// ||v||_q for the dual q of `p`, by direct summation.
double dual_norm(std::span<const double> v, Norm p);

/// Exact image bounds of an affine stack over the p-ball: the stack is first
/// collapsed to a single map x -> A x + c.
std::pair<Vector, Vector> affine_stack_bounds(const Network& net, std::span<const double> x0, double eps, Norm p);

/// Naive softmax without max subtraction.
Vector naive_softmax(std::span<const double> z);

/// Naive forward pass written from the layer definitions.
Vector naive_forward(const Network& net, std::span<const double> x);

/// Central differences of f at x with step h.
Vector central_differences(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                           double h);

/// |a - b| <= tol * max(|a|, |b|, floor)
bool close_relative(double a, double b, double tol, double floor = 1e-3);

/// Smallest candidate t in scores with  #{s_i <= t} / (n+1) >= 1 - alpha,
/// using alpha = alpha_num / alpha_den exactly in integers; nullopt when only
/// the atom at infinity reaches the level.
std::optional<double> brute_force_quantile(std::span<const double> scores, std::uint64_t alpha_num,
                                           std::uint64_t alpha_den);

/// Two-sided band [lo, hi] of BetaBinomial(trials, a, b) leaving at most
/// (1 - level)/2 mass in each tail, with the pmf built by the ratio recurrence.
std::pair<std::size_t, std::size_t> beta_binomial_band(std::size_t trials, double a, double b, double level);

/// Pre-activations of every activation layer at x; used to stay away from
/// ReLU kinks in finite-difference tests.
double min_abs_preactivation(const Network& net, std::span<const double> x);

}  // namespace vrcp::oracle
