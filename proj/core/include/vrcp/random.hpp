#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

#include "vrcp/tensor.hpp"

namespace vrcp {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a master seed and a path of
/// indices, e.g. derive_seed(master, {split, epsilon_index, point}).
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

double uniform(Rng& rng, double lo, double hi);
double standard_normal(Rng& rng);

/// A uniformly distributed point of the p-ball of radius `radius` around
/// `center`. For l2 and l1 a uniform direction on the unit sphere is scaled by
/// radius * U^(1/d).
Vector sample_ball(Rng& rng, std::span<const double> center, double radius, Norm norm);

}  // namespace vrcp
