#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

using namespace shew;
using namespace shew::testing;

TEST_CASE("grid construction and indexing") {
  CircleGrid g = CircleGrid::with_nodes(64);
  CHECK(g.dx * g.n_x == doctest::Approx(kTwoPi).epsilon(1e-15));
  CHECK(g.node(64) == g.node(0));
  CHECK(g.node(-1) == g.node(63));
  CHECK_THROWS_AS(CircleGrid::with_nodes(3), std::invalid_argument);
}

TEST_CASE("arc distance") {
  CHECK(arc_distance(0.0, 0.0) == 0.0);
  CHECK(arc_distance(0.0, kPi) == doctest::Approx(kPi).epsilon(1e-15));
  // wrap-around pair: min(|x-y|, 2pi-|x-y|) evaluated directly
  CHECK(arc_distance(0.1, 6.2) == doctest::Approx(kTwoPi - 6.1).epsilon(1e-12));
  CHECK(arc_distance(-0.3, 0.3) == doctest::Approx(0.6).epsilon(1e-12));

  // triangle inequality, exhaustively on a small grid
  CircleGrid g = CircleGrid::with_nodes(16);
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b)
      for (int c = 0; c < 16; ++c) {
        double ab = arc_distance(g.node(a), g.node(b));
        double bc = arc_distance(g.node(b), g.node(c));
        double ac = arc_distance(g.node(a), g.node(c));
        CHECK(ac <= ab + bc + 1e-14);
      }
  for (int a = 0; a < 16; ++a)
    for (int b = 0; b < 16; ++b) {
      double d = arc_distance(g.node(a), g.node(b));
      CHECK(d >= 0.0);
      CHECK(d <= kPi + 1e-15);
      CHECK(d == arc_distance(g.node(b), g.node(a)));
    }
}

TEST_CASE("l2 inner product") {
  CircleGrid g = grid64();
  Field one = constant_field(g, 1.0);
  CHECK(l2_inner(one, one) == doctest::Approx(kTwoPi).epsilon(1e-14));

  Field s = make_field(g, [](double x) { return std::sin(x); });
  Field c = make_field(g, [](double x) { return std::cos(x); });
  CHECK(std::abs(l2_inner(s, c)) <= 1e-12);            // orthogonality
  CHECK(l2_inner(s, s) == doctest::Approx(kPi).epsilon(1e-12));  // exact quadrature of sin^2
  CHECK(l2_inner(s, c) == l2_inner(c, s));

  Field other{CircleGrid::with_nodes(32), Vec::Zero(32), 0.0};
  CHECK_THROWS_AS(l2_inner(s, other), std::invalid_argument);

  // positivity on nonzero fields
  Field r = random_field(g, 1.0, 7);
  CHECK(l2_inner(r, r) > 0.0);
}

TEST_CASE("sup norm over paths") {
  CircleGrid g = CircleGrid::with_nodes(4);
  FieldPath zero{g, {0.0, 0.5}, Mat::Zero(2, 4)};
  CHECK(sup_norm(zero) == 0.0);

  Field single = constant_field(g, 0.0);
  single.values[2] = -3.0;
  CHECK(sup_norm(single) == 3.0);

  FieldPath two{g, {0.0, 1.0}, Mat::Zero(2, 4)};
  two.values(0, 1) = 1.0;
  two.values(1, 3) = -2.5;
  CHECK(sup_norm(two) == 2.5);

  FieldPath empty{g, {}, Mat(0, 4)};
  CHECK_THROWS_AS(sup_norm(empty), std::invalid_argument);
}

TEST_CASE("holder norm basics") {
  CircleGrid g = CircleGrid::with_nodes(8);
  FieldPath constant{g, {0.0, 0.3, 0.7}, Mat::Constant(3, 8, 4.2)};
  CHECK(holder_norm(constant, 0.2) == 0.0);

  // v(x,t) = t on slices {0,1}: the same-node cross-slice pair gives |1|/1^a = 1
  FieldPath ramp{g, {0.0, 1.0}, Mat::Zero(2, 8)};
  ramp.values.row(1).setConstant(1.0);
  CHECK(holder_norm(ramp, 0.2) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(holder_norm(ramp, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(holder_norm(ramp, 0.0), std::invalid_argument);
}

TEST_CASE("holder norm equals the all-pair oracle on small grids") {
  CircleGrid g = CircleGrid::with_nodes(16);
  GaussianStream noise(99);
  FieldPath path{g, {}, Mat(16, 16)};
  for (int k = 0; k < 16; ++k) {
    path.times.push_back(0.05 * k);
    for (int i = 0; i < 16; ++i) path.values(k, i) = noise.standard_normal();
  }
  CHECK(holder_norm(path, 0.2) == doctest::Approx(holder_norm_bruteforce(path, 0.2)).epsilon(1e-14));
}

TEST_CASE("holder norm subsampling stays within 10% of the full-pair value") {
  // 65 x 64 samples: just over the all-pair threshold, so the subsampled path
  // is exercised while the brute force oracle is still affordable
  CircleGrid g = grid64();
  GaussianStream noise(1234);
  int n_t = 65;
  FieldPath path{g, {}, Mat(n_t, 64)};
  Vec v = Vec::Zero(64);
  for (int k = 0; k < n_t; ++k) {
    path.times.push_back(0.01 * k);
    for (int i = 0; i < 64; ++i) v[i] += 0.1 * noise.standard_normal();
    path.values.row(k) = v.matrix().transpose();
  }
  double sub = holder_norm(path, 0.2);
  double full = holder_norm_bruteforce(path, 0.2);
  CHECK(sub <= full + 1e-12);
  CHECK(sub >= 0.9 * full);
}

TEST_CASE("holder norm absolute homogeneity") {
  CircleGrid g = CircleGrid::with_nodes(12);
  GaussianStream noise(5);
  FieldPath path{g, {}, Mat(10, 12)};
  for (int k = 0; k < 10; ++k) {
    path.times.push_back(0.1 * k);
    for (int i = 0; i < 12; ++i) path.values(k, i) = noise.standard_normal();
  }
  double base = holder_norm(path, 0.15);

  FieldPath scaled = path;
  scaled.values *= 4.0;  // power of two: exact homogeneity
  CHECK(holder_norm(scaled, 0.15) == 4.0 * base);

  FieldPath scaled2 = path;
  scaled2.values *= -3.7;
  CHECK(holder_norm(scaled2, 0.15) == doctest::Approx(3.7 * base).epsilon(1e-12));
}

TEST_CASE("wall pair validation") {
  CircleGrid g = grid32();
  CHECK_NOTHROW(constant_walls(g, -1.0, 1.0));
  CHECK_THROWS_AS(constant_walls(g, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_walls(g, [](double x) { return std::sin(x); },
                             [](double x) { return std::sin(x) + 0.0; }),
                  std::invalid_argument);
  // touching at a single node is still rejected (H1 is strict)
  CHECK_THROWS_AS(make_walls(g, [](double x) { return std::cos(x) - 1.0; },
                             [](double) { return 0.0; }),
                  std::invalid_argument);
}

TEST_CASE("space-time metric") {
  CHECK(space_time_distance(0.0, 0.0, 0.0, 0.0) == 0.0);
  CHECK(space_time_distance(0.0, 0.0, kPi, 0.0) == doctest::Approx(kPi));
  CHECK(space_time_distance(1.0, 0.5, 1.0, 0.75) == doctest::Approx(0.25));
  CHECK(space_time_distance(0.3, 0.1, 5.9, 0.4) ==
        doctest::Approx(space_time_distance(5.9, 0.4, 0.3, 0.1)));
}
