#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

namespace shew {

using Vec = Eigen::ArrayXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;
inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Uniform periodic grid on the circle of circumference 2*pi.
/// Node i sits at x_i = i * dx, dx = 2*pi / n_x; all index arithmetic is mod n_x.
struct CircleGrid {
  int n_x = 0;
  double dx = 0.0;

  static CircleGrid with_nodes(int n_x) {
    if (n_x < 4) throw std::invalid_argument("CircleGrid: need at least 4 nodes");
    return CircleGrid{n_x, kTwoPi / n_x};
  }

  double node(int i) const {
    int m = i % n_x;
    if (m < 0) m += n_x;
    return m * dx;
  }

  Vec nodes() const {
    Vec x(n_x);
    for (int i = 0; i < n_x; ++i) x[i] = i * dx;
    return x;
  }

  friend bool operator==(const CircleGrid& a, const CircleGrid& b) {
    return a.n_x == b.n_x;
  }
};

/// Nodal samples of a scalar function on the circle at one instant.
struct Field {
  CircleGrid grid;
  Vec values;
  double time = 0.0;

  int size() const { return grid.n_x; }
};

inline Field make_field(const CircleGrid& grid, const std::function<double(double)>& fn,
                        double time = 0.0) {
  Field f{grid, Vec(grid.n_x), time};
  for (int i = 0; i < grid.n_x; ++i) f.values[i] = fn(grid.node(i));
  return f;
}

inline Field constant_field(const CircleGrid& grid, double c, double time = 0.0) {
  return Field{grid, Vec::Constant(grid.n_x, c), time};
}

inline void require_same_grid(const CircleGrid& a, const CircleGrid& b, const char* where) {
  if (!(a == b)) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

inline void require_finite(const Vec& v, const char* where) {
  if (!v.isFinite().all()) throw std::runtime_error(std::string(where) + ": non-finite values");
}

/// Lower and upper reflecting walls, sampled at the nodes. Strictly ordered (H1).
struct WallPair {
  Field lower;
  Field upper;

  static WallPair of(Field lower, Field upper) {
    require_same_grid(lower.grid, upper.grid, "WallPair");
    require_finite(lower.values, "WallPair");
    require_finite(upper.values, "WallPair");
    if (!(lower.values < upper.values).all())
      throw std::invalid_argument("WallPair: lower wall must be strictly below upper wall");
    return WallPair{std::move(lower), std::move(upper)};
  }

  const CircleGrid& grid() const { return lower.grid; }
};

inline WallPair make_walls(const CircleGrid& grid, const std::function<double(double)>& h1,
                           const std::function<double(double)>& h2) {
  return WallPair::of(make_field(grid, h1), make_field(grid, h2));
}

inline WallPair constant_walls(const CircleGrid& grid, double h1, double h2) {
  return WallPair::of(constant_field(grid, h1), constant_field(grid, h2));
}

/// Space-time trajectory: row k of `values` holds the field at times[k].
struct FieldPath {
  CircleGrid grid;
  std::vector<double> times;
  Mat values;  // (n_t, n_x)

  int steps() const { return static_cast<int>(times.size()); }

  Field slice(int k) const {
    return Field{grid, values.row(k).array().transpose(), times[static_cast<size_t>(k)]};
  }

  static FieldPath from_fields(const std::vector<Field>& fields) {
    if (fields.empty()) throw std::invalid_argument("FieldPath: empty path");
    FieldPath p{fields.front().grid, {}, Mat(static_cast<int>(fields.size()), fields.front().size())};
    for (size_t k = 0; k < fields.size(); ++k) {
      require_same_grid(fields[k].grid, p.grid, "FieldPath");
      p.times.push_back(fields[k].time);
      p.values.row(static_cast<int>(k)) = fields[k].values.matrix().transpose();
    }
    return p;
  }
};

/// Shortest-arc distance on the circle; both angles are reduced mod 2*pi first.
double arc_distance(double x, double y);

/// Parabolic-type space-time distance d((x,t),(y,s)) = sqrt(r(x,y)^2 + (t-s)^2).
double space_time_distance(double x, double t, double y, double s);

/// L^2(S^1) inner product by the rectangle rule: sum_i a_i b_i dx.
double l2_inner(const Field& a, const Field& b);

inline double l2_norm(const Field& a) { return std::sqrt(l2_inner(a, a)); }

/// sup over nodes of |value|.
double sup_norm(const Field& f);

/// sup over all nodes and recorded times of |value|.
double sup_norm(const FieldPath& path);

inline constexpr std::uint64_t kHolderPairSeed = 0x9e3779b97f4a7c15ull;

/// Sampled Hoelder quotient sup |v(x,t)-v(y,s)| / d((x,t),(y,s))^alpha, alpha in (0,1/4).
/// All pairs when n_x*n_t <= 2^12; otherwise every nearest-neighbour pair plus a
/// 2^16-pair deterministic random subsample (selection independent of the values,
/// so absolute homogeneity is exact).
double holder_norm(const FieldPath& path, double alpha,
                   std::uint64_t subsample_seed = kHolderPairSeed);

}  // namespace shew
