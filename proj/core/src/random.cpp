#include "vrcp/random.hpp"

#include <cmath>

namespace vrcp {

std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t s = mix_seed(master);
  for (std::uint64_t p : path) s = mix_seed(s ^ mix_seed(p + 0x632be59bd9b4e019ULL));
  return s;
}

// Hand-rolled transforms instead of std:: distributions so that streams are
// identical across standard library implementations.
double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double standard_normal(Rng& rng) {
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform(rng, 0.0, 1.0);
  const double u2 = uniform(rng, 0.0, 1.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Vector sample_ball(Rng& rng, std::span<const double> center, double radius, Norm norm) {
  const std::size_t d = center.size();
  Vector x(center.begin(), center.end());
  if (radius == 0.0 || d == 0) return x;
  if (norm == Norm::linf) {
    for (double& v : x) v += uniform(rng, -radius, radius);
    return x;
  }
  Vector dir(d);
  if (norm == Norm::l2) {
    for (double& v : dir) v = standard_normal(rng);
  } else {
    // Normalized exponentials are uniform on the simplex; random signs spread
    // them over the l1 sphere.
    for (double& v : dir) {
      double u = 0.0;
      while (u <= 0.0) u = uniform(rng, 0.0, 1.0);
      v = -std::log(u);
      if (uniform(rng, 0.0, 1.0) < 0.5) v = -v;
    }
  }
  const double n = lp_norm(dir, norm);
  if (n == 0.0) return x;
  const double r = radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < d; ++i) x[i] += r * dir[i] / n;
  return x;
}

}  // namespace vrcp
