#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "kslearn/experiment.hpp"
#include "kslearn/particles.hpp"

namespace kstest {

using kslearn::ParticleConfiguration;

/// Uniform positions in [lo, hi]^d from a seeded engine.
inline ParticleConfiguration random_config(std::mt19937_64& rng, int d, std::size_t n,
                                           double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  ParticleConfiguration x(d, n);
  for (std::size_t i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k)
      x(i, k) = u(rng);
  return x;
}

/// Positions with every pair at least `min_gap` apart (rejection sampling).
inline ParticleConfiguration spread_config(std::mt19937_64& rng, int d, std::size_t n,
                                           double min_gap) {
  for (;;) {
    ParticleConfiguration x = random_config(rng, d, n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i)
      for (std::size_t j = i + 1; j < n && ok; ++j)
        ok = kslearn::pair_distance(x, i, j) >= min_gap;
    if (ok)
      return x;
  }
}

inline double rel_diff(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v)
    m = std::max(m, std::abs(e));
  return m;
}

/// Partition over the pairwise distances of the initial frames of
/// initial_positions(seed, m, d, n), m < M, widened by `margin` on both sides.
inline kslearn::Partition initial_span_partition(std::uint64_t seed, std::size_t M, int d,
                                                 std::size_t n, std::size_t count,
                                                 double margin) {
  double lo = 1e300, hi = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const auto x = kslearn::initial_positions(seed, m, d, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        lo = std::min(lo, kslearn::pair_distance(x, i, j));
        hi = std::max(hi, kslearn::pair_distance(x, i, j));
      }
  }
  return kslearn::Partition::uniform(std::max(0.0, lo - margin), hi + margin, count);
}

} // namespace kstest
