#pragma once

#include "doctest.h"

#include "shew/circle_domain.hpp"
#include "shew/noise.hpp"

#include <cmath>
#include <vector>

namespace shew::testing {

inline CircleGrid grid64() { return CircleGrid::with_nodes(64); }
inline CircleGrid grid32() { return CircleGrid::with_nodes(32); }

/// Brute-force Hoelder quotient over every sample pair; the independent oracle
/// for holder_norm.
inline double holder_norm_bruteforce(const FieldPath& path, double alpha) {
  const int n_t = path.steps();
  const int n_x = path.grid.n_x;
  double best = 0.0;
  for (int a = 0; a < n_t * n_x; ++a) {
    for (int b = a + 1; b < n_t * n_x; ++b) {
      int k1 = a / n_x, i1 = a % n_x, k2 = b / n_x, i2 = b % n_x;
      double dv = std::abs(path.values(k1, i1) - path.values(k2, i2));
      if (dv == 0.0) continue;
      double d = space_time_distance(i1 * path.grid.dx, path.times[(size_t)k1],
                                     i2 * path.grid.dx, path.times[(size_t)k2]);
      best = std::max(best, dv / std::pow(d, alpha));
    }
  }
  return best;
}

/// Deterministic pseudo-random field with values of the given scale.
inline Field random_field(const CircleGrid& grid, double scale, std::uint64_t key) {
  GaussianStream g(key);
  Field f{grid, Vec(grid.n_x), 0.0};
  for (int i = 0; i < grid.n_x; ++i) f.values[i] = scale * g.standard_normal();
  return f;
}

}  // namespace shew::testing
