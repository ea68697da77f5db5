#include "shew/circle_domain.hpp"

#include <algorithm>
#include <cmath>

namespace shew {

namespace {

double reduce_mod_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

double arc_distance(double x, double y) {
  double d = std::abs(reduce_mod_2pi(x) - reduce_mod_2pi(y));
  return std::min(d, kTwoPi - d);
}

double space_time_distance(double x, double t, double y, double s) {
  double r = arc_distance(x, y);
  return std::sqrt(r * r + (t - s) * (t - s));
}

double l2_inner(const Field& a, const Field& b) {
  require_same_grid(a.grid, b.grid, "l2_inner");
  return (a.values * b.values).sum() * a.grid.dx;
}

double sup_norm(const Field& f) { return f.values.abs().maxCoeff(); }

double sup_norm(const FieldPath& path) {
  if (path.steps() == 0) throw std::invalid_argument("sup_norm: empty path");
  return path.values.array().abs().maxCoeff();
}

namespace {

struct PairQuotient {
  const FieldPath& path;
  double alpha;
  int n_x;

  double at(int k1, int i1, int k2, int i2) const {
    if (k1 == k2 && i1 == i2) return 0.0;
    double dv = std::abs(path.values(k1, i1) - path.values(k2, i2));
    if (dv == 0.0) return 0.0;
    double d = space_time_distance(i1 * path.grid.dx, path.times[static_cast<size_t>(k1)],
                                   i2 * path.grid.dx, path.times[static_cast<size_t>(k2)]);
    return dv / std::pow(d, alpha);
  }
};

}  // namespace

double holder_norm(const FieldPath& path, double alpha, std::uint64_t subsample_seed) {
  if (!(alpha > 0.0 && alpha < 0.25))
    throw std::invalid_argument("holder_norm: alpha must lie in (0, 1/4)");
  if (path.steps() == 0) throw std::invalid_argument("holder_norm: empty path");

  const int n_t = path.steps();
  const int n_x = path.grid.n_x;
  const std::int64_t total = static_cast<std::int64_t>(n_t) * n_x;
  PairQuotient q{path, alpha, n_x};
  double best = 0.0;

  if (total <= (1 << 12)) {
    for (std::int64_t a = 0; a < total; ++a)
      for (std::int64_t b = a + 1; b < total; ++b)
        best = std::max(best, q.at(static_cast<int>(a / n_x), static_cast<int>(a % n_x),
                                   static_cast<int>(b / n_x), static_cast<int>(b % n_x)));
    return best;
  }

  // Nearest neighbours dominate the quotient for rough paths: all spatial and
  // temporal neighbour pairs, then a fixed-count random subsample.
  for (int k = 0; k < n_t; ++k)
    for (int i = 0; i < n_x; ++i)
      best = std::max(best, q.at(k, i, k, (i + 1) % n_x));
  for (int k = 0; k + 1 < n_t; ++k)
    for (int i = 0; i < n_x; ++i)
      best = std::max(best, q.at(k, i, k + 1, i));

  std::uint64_t state = subsample_seed;
  for (int s = 0; s < (1 << 16); ++s) {
    std::uint64_t r1 = mix64(state ^ (2 * static_cast<std::uint64_t>(s)));
    std::uint64_t r2 = mix64(state ^ (2 * static_cast<std::uint64_t>(s) + 1));
    std::int64_t a = static_cast<std::int64_t>(r1 % static_cast<std::uint64_t>(total));
    std::int64_t b = static_cast<std::int64_t>(r2 % static_cast<std::uint64_t>(total));
    if (a == b) continue;
    best = std::max(best, q.at(static_cast<int>(a / n_x), static_cast<int>(a % n_x),
                               static_cast<int>(b / n_x), static_cast<int>(b % n_x)));
  }
  return best;
}

}  // namespace shew
