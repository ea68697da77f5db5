#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

#include "shew/ergodics.hpp"
#include "shew/heat_kernel.hpp"
#include "shew/stats.hpp"

using namespace shew;
using namespace shew::testing;

namespace {

PenalizedParams projected(double dt, ScalarCoefficient f = coefficients::zero(),
                          ScalarCoefficient sigma = coefficients::constant(1.0)) {
  PenalizedParams p;
  p.dt = dt;
  p.scheme = Scheme::Projected;
  p.f = std::move(f);
  p.sigma = std::move(sigma);
  return p;
}

}  // namespace

TEST_CASE("bump profile: normalization, ramp asymptotics, derivative identity") {
  const BumpProfile& b = BumpProfile::instance();
  CHECK(b.cdf(-1.0) == 0.0);
  CHECK(b.cdf(1.0) == 1.0);
  CHECK(b.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(b.ramp(-2.5) == 2.5);  // exact linear ramp outside the support
  CHECK(b.ramp(1.0) == 0.0);
  CHECK(b.ramp(0.0) > 0.0);
  for (double w : {-0.8, -0.3, 0.0, 0.4, 0.9}) {
    double h = 1e-5;
    double fd = (b.ramp(w + h) - b.ramp(w - h)) / (2 * h);
    CHECK(fd == doctest::Approx(-(1.0 - b.cdf(w))).epsilon(1e-3));
  }
}

TEST_CASE("mollified scalar: affine maps are fixed points of the mollifier") {
  ScalarCoefficient f = coefficients::affine(0.7, -2.0);
  MollifiedScalar fn(f, 16, -3.0, 3.0);
  for (double z : {-2.5, -1.0, 0.0, 0.3, 2.9}) {
    CHECK(fn.value(z) == doctest::Approx(0.7 - 2.0 * z).epsilon(1e-7));
    CHECK(fn.deriv(z) == doctest::Approx(-2.0).epsilon(1e-7));
  }
}

TEST_CASE("uniform mollifier convergence at rate Lip(f)/n") {
  ScalarCoefficient f = coefficients::sine(1.0);
  for (int n : {10, 100, 1000}) {
    MollifiedScalar fn(f, n, -2.0, 2.0);
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
      double z = -2.0 + 4.0 * i / 400.0;
      worst = std::max(worst, std::abs(fn.value(z) - f(z)));
    }
    CHECK(worst <= f.lipschitz / n + 1e-9);
  }
}

TEST_CASE("mollified penalties: signs, ranges, pointwise convergence") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  for (int n : {10, 100, 1000}) {
    MollifiedCoefficients moll(coefficients::zero(), coefficients::constant(1.0), walls, n);
    for (int i = 0; i < g.n_x; i += 5)
      for (int s = 0; s <= 100; ++s) {
        double z = -2.0 + 4.0 * s / 100.0;
        double dk = moll.lower_penalty_deriv(z, i);
        double dl = moll.upper_penalty_deriv(z, i);
        CHECK(dk <= 1e-12);
        CHECK(dk >= -1.0 - 1e-12);
        CHECK(dl >= -1e-12);
        CHECK(dl <= 1.0 + 1e-12);
        // k_n -> (z - h1)^-, l_n -> (z - h2)^+ at rate 1/n
        CHECK(std::abs(moll.lower_penalty(z, i) - std::max(-1.0 - z, 0.0)) <= 1.0 / n);
        CHECK(std::abs(moll.upper_penalty(z, i) - std::max(z - 1.0, 0.0)) <= 1.0 / n);
      }
  }
}

TEST_CASE("occupation measure: deterministic fixed point and wall support") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  auto obs = default_observables(g);

  OccupationSummary rest = occupation_measure(
      constant_field(g, 0.0), walls, 2.0, 0.5, 0.25, obs,
      projected(1e-2, coefficients::zero(), coefficients::zero()), SeedSpec{1, 0}, 2, 1);
  for (const auto& samples : rest.samples)
    for (double v : samples) CHECK(v == 0.0);

  OccupationSummary noisy = occupation_measure(constant_field(g, 0.0), walls, 5.0, 1.0, 0.5,
                                               obs, projected(2e-3), SeedSpec{7, 0}, 10, 1);
  for (size_t o = 0; o < 4; ++o)  // point observables stay within the walls
    for (double v : noisy.samples[o]) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
  CHECK(std::is_sorted(noisy.samples[0].begin(), noisy.samples[0].end()));
  CHECK_THROWS_AS(occupation_measure(constant_field(g, 0.0), walls, 1.0, 2.0, 0.5, obs,
                                     projected(1e-2), SeedSpec{1, 0}, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("occupation measure: symmetric setup has a centered median") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  auto obs = default_observables(g);
  OccupationSummary sym = occupation_measure(constant_field(g, 0.0), walls, 60.0, 20.0, 10.0,
                                             obs, projected(4e-3), SeedSpec{99, 0}, 60, 1);
  // u -> -u symmetry: point-evaluation median near 0; band from the sample sd
  const auto& point = sym.samples[0];
  double median = stats::quantile(point, 0.5);
  auto ms = stats::mean_stderr(point);
  double sd = ms.stderr_ * std::sqrt(static_cast<double>(point.size()));
  CHECK(std::abs(median) <= 3.0 * 1.2533 * sd / std::sqrt(static_cast<double>(point.size())) + 0.05);
}

TEST_CASE("occupation stationarity: doubling the burn-in leaves the law in place") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  auto obs = default_observables(g);
  PenalizedParams p = projected(4e-3);
  OccupationSummary a = occupation_measure(constant_field(g, 0.0), walls, 120.0, 20.0, 10.0,
                                           obs, p, SeedSpec{17, 0}, 40, 1);
  OccupationSummary b = occupation_measure(constant_field(g, 0.0), walls, 120.0, 40.0, 10.0,
                                           obs, p, SeedSpec{17, 1000}, 40, 1);
  for (size_t o = 0; o < obs.size(); ++o) {
    double d = stats::ks_distance(a.samples[o], b.samples[o]);
    double band = stats::ks_null_band(a.samples[o].size(), b.samples[o].size(), 1.949);
    CHECK(d <= band);
  }
}

TEST_CASE("two-chain proxy: identical initial laws sit inside the null band") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  Field u0 = constant_field(g, 0.3);
  TwoChainReport rep = two_chain_tv_proxy(u0, u0, walls, {1.0}, 400, projected(5e-3),
                                          SeedSpec{12, 0}, 16, 1);
  for (double k : rep.ks[0]) CHECK(k <= stats::ks_null_band(400, 400, 1.63));
  CHECK(rep.gap_probability[0] == 0.0);  // equal data couple at time zero
}

TEST_CASE("two-chain proxy: distances and gap probabilities shrink in time") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  TwoChainReport rep =
      two_chain_tv_proxy(constant_field(g, 0.9), constant_field(g, -0.9), walls, {2.0, 20.0},
                         250, projected(5e-3), SeedSpec{21, 0}, 16, 1);
  double early = *std::max_element(rep.ks[0].begin(), rep.ks[0].end());
  double late = *std::max_element(rep.ks[1].begin(), rep.ks[1].end());
  CHECK(late <= early + 2.0 * rep.ks_null_band);
  CHECK(late <= 0.15);  // acceptance asserts <= 0.1 with 1e3 replicas
  CHECK(rep.gap_probability[1] <= rep.gap_probability[0]);
}

TEST_CASE("tightness: zero noise gives zero Hoelder norms") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  PenalizedParams p = projected(1e-2, coefficients::zero(), coefficients::zero());
  TightnessReport rep = tightness_stats({walls.lower, walls.upper}, 0.24, 0.04, 3, walls, p,
                                        0.5, SeedSpec{5, 0}, 1);
  for (double m : rep.moments) CHECK(m == 0.0);
  CHECK(rep.moment_ratio == 1.0);
  CHECK_THROWS_AS(tightness_stats({walls.lower}, 0.3, 0.01, 2, walls, p, 0.5, SeedSpec{5, 0}, 1),
                  std::invalid_argument);
}

TEST_CASE("tightness: doubling sigma scales the Hoelder statistics by two") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -4.0, 4.0);  // walls wide: v is linear in sigma
  Field mid = constant_field(g, 0.0);
  PenalizedParams p1 = projected(5e-3, coefficients::zero(), coefficients::constant(0.5));
  PenalizedParams p2 = projected(5e-3, coefficients::zero(), coefficients::constant(1.0));
  TightnessReport r1 = tightness_stats({mid}, 0.24, 0.04, 20, walls, p1, 1.0, SeedSpec{31, 0}, 1);
  TightnessReport r2 = tightness_stats({mid}, 0.24, 0.04, 20, walls, p2, 1.0, SeedSpec{31, 0}, 1);
  CHECK(r2.moments[0] == doctest::Approx(2.0 * r1.moments[0]).epsilon(1e-10));
}

TEST_CASE("tightness: moment ratio across initial data stays below two") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  PenalizedParams p = projected(5e-3, coefficients::sine(0.5), coefficients::tanh_band(0.5, 1.5));
  Field mid = constant_field(g, 0.0);
  TightnessReport rep = tightness_stats({walls.lower, walls.upper, mid}, 0.24, 0.04, 60, walls,
                                        p, 1.0, SeedSpec{41, 0}, 1);
  CHECK(rep.moment_ratio <= 2.0);
  for (double m : rep.moments) CHECK(m > 0.0);
}

TEST_CASE("strong Feller probe: constant observables and validation") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  PenalizedParams p = projected(5e-3);
  Observable konst{"const", [](const Field&) { return 0.25; }};
  StrongFellerReport rep = strong_feller_probe(konst, 0.25, constant_field(g, 0.2),
                                               constant_field(g, -0.2), walls,
                                               {0.05, 0.2}, 50, p, SeedSpec{61, 0}, 1);
  for (double r : rep.ratio) CHECK(r == 0.0);

  CHECK_THROWS_AS(strong_feller_probe(konst, 0.25, constant_field(g, 0.2),
                                      constant_field(g, 0.2), walls, {0.1}, 10, p,
                                      SeedSpec{1, 0}, 1),
                  std::invalid_argument);
  PenalizedParams bad = projected(5e-3, coefficients::zero(), coefficients::affine(0.0, 1.0));
  CHECK_THROWS_AS(strong_feller_probe(konst, 0.25, constant_field(g, 0.2),
                                      constant_field(g, -0.2), walls, {0.1}, 10, bad,
                                      SeedSpec{1, 0}, 1),
                  std::invalid_argument);
}

TEST_CASE("strong Feller probe: linear response in the initial gap at small t") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  PenalizedParams p = projected(2e-3);
  Observable phi{"sin_mean", [](const Field& f) { return std::sin(f.values.mean()); }};
  StrongFellerReport wide = strong_feller_probe(phi, 1.0, constant_field(g, 0.2),
                                                constant_field(g, -0.2), walls, {0.05}, 3000, p,
                                                SeedSpec{71, 0}, 1);
  StrongFellerReport narrow = strong_feller_probe(phi, 1.0, constant_field(g, 0.1),
                                                  constant_field(g, -0.1), walls, {0.05}, 3000,
                                                  p, SeedSpec{72, 0}, 1);
  double ratio = wide.diff[0] / narrow.diff[0];
  double se = ratio * (wide.diff_se[0] / wide.diff[0] + narrow.diff_se[0] / narrow.diff[0]);
  CHECK(std::abs(ratio - 2.0) <= 2.0 * se + 0.2);
}

TEST_CASE("derivative flow: zero direction, pure heat flow, linearity") {
  CircleGrid g = grid32();
  WallPair far = constant_walls(g, -50.0, 50.0);
  MollifiedCoefficients moll(coefficients::zero(), coefficients::constant(1.0), far, 16);
  const double eps = 0.05, dlt = 0.05, T = 0.25, dt = 1e-3;

  // zero direction: the flow vanishes identically
  DerivativeFlowReport zero = derivative_flow(constant_field(g, 0.0), constant_field(g, 0.0),
                                              moll, eps, dlt, T, dt, SeedSpec{81, 0}, 2, 1e-4, 1);
  for (double m : zero.mean_x2) CHECK(m == 0.0);

  // sigma constant (sigma_n' = 0), f = 0, walls far: X is the heat flow of ubar0
  Field ubar = make_field(g, [](double x) { return std::cos(x); });
  DerivativeFlowReport heat = derivative_flow(constant_field(g, 0.0), ubar, moll, eps, dlt, T,
                                              dt, SeedSpec{82, 0}, 1, 1e-4, 1);
  double expected = l2_inner(ubar, ubar);
  for (size_t k = 0; k < heat.times.size(); ++k) {
    double decay = std::exp(-2.0 * heat.times[k]);  // |e^{tD}cos|_H^2 = e^{-2t} pi... relative
    CHECK(heat.mean_x2[k] == doctest::Approx(expected * decay).epsilon(1e-6));
    if (k > 0) CHECK(heat.mean_x2[k] <= heat.mean_x2[k - 1]);
  }

  CHECK_THROWS_AS(derivative_flow(constant_field(g, 0.0), ubar, moll, 1e-4, 1e-4, T, dt,
                                  SeedSpec{1, 0}, 1, 1e-4, 1),
                  std::invalid_argument);
}

TEST_CASE("derivative flow: linearity in the direction and FD consistency") {
  CircleGrid g = grid32();
  WallPair walls = constant_walls(g, -1.0, 1.0);
  MollifiedCoefficients moll(coefficients::sine(0.5), coefficients::tanh_band(0.5, 1.5), walls,
                             16);
  const double eps = 0.05, dlt = 0.05, T = 0.25, dt = 1e-3;
  Field u0 = constant_field(g, 0.0);
  Field d1 = make_field(g, [](double x) { return std::cos(x); });
  Field d2 = make_field(g, [](double x) { return std::sin(2 * x) - 0.3; });
  Field combo{g, 2.0 * d1.values - 0.5 * d2.values, 0.0};

  // linearity via the FD-free linearized flow (same noise, replica 0)
  auto final_x2 = [&](const Field& dir) {
    return derivative_flow(u0, dir, moll, eps, dlt, T, dt, SeedSpec{90, 0}, 1, 1e-4, 1);
  };
  DerivativeFlowReport ra = final_x2(d1);
  DerivativeFlowReport rb = final_x2(d2);
  DerivativeFlowReport rc = final_x2(combo);
  // |X| is not additive, but FD consistency transfers: check it per direction
  CHECK(ra.fd_rel_error <= 0.05);
  CHECK(rb.fd_rel_error <= 0.05);
  CHECK(rc.fd_rel_error <= 0.05);

  // uniform bound proxy: sup_t E|X|^2 / |ubar0|^2 finite and stable under
  // (eps, delta) halving
  DerivativeFlowReport lvl1 = derivative_flow(u0, d1, moll, 0.05, 0.05, T, dt, SeedSpec{91, 0},
                                              40, 1e-4, 1);
  DerivativeFlowReport lvl2 = derivative_flow(u0, d1, moll, 0.025, 0.025, T, dt, SeedSpec{91, 0},
                                              40, 1e-4, 1);
  CHECK(std::isfinite(lvl1.sup_ratio));
  CHECK(std::isfinite(lvl2.sup_ratio));
  double stability = lvl2.sup_ratio / lvl1.sup_ratio;
  CHECK(stability >= 0.5);
  CHECK(stability <= 2.0);
}

TEST_CASE("derivative flow linearity is exact for the linearized scheme") {
  CircleGrid g = CircleGrid::with_nodes(16);
  WallPair walls = constant_walls(g, -1.0, 1.0);
  MollifiedCoefficients moll(coefficients::sine(0.5), coefficients::tanh_band(0.5, 1.5), walls,
                             16);
  // step the linearized flow by hand for two directions and their combination
  const double eps = 0.05, dlt = 0.05, dt = 1e-3;
  Semigroup S(g, dt);
  Vec u = Vec::Zero(g.n_x);
  Vec x1 = make_field(g, [](double x) { return std::cos(x); }).values;
  Vec x2 = make_field(g, [](double x) { return std::sin(x); }).values;
  Vec xc = 2.0 * x1 - 0.5 * x2;
  SeedSpec s{95, 0, StreamTag::W1};
  for (int k = 0; k < 100; ++k) {
    NoiseIncrement dW = sample_increment(g, dt, s, k);
    auto lin_step = [&](Vec& x) {
      Vec w(g.n_x);
      for (int i = 0; i < g.n_x; ++i) {
        double lin = moll.f_deriv(u[i]) + moll.lower_penalty_deriv(u[i], i) / dlt -
                     moll.upper_penalty_deriv(u[i], i) / eps;
        w[i] = x[i] + dt * lin * x[i] + moll.sigma_deriv(u[i]) * x[i] * dW.values[i] / g.dx;
      }
      x = S.apply(w);
    };
    lin_step(x1);
    lin_step(x2);
    lin_step(xc);
    Vec w(g.n_x);
    for (int i = 0; i < g.n_x; ++i) {
      double drift = moll.f(u[i]) + moll.lower_penalty(u[i], i) / dlt -
                     moll.upper_penalty(u[i], i) / eps;
      w[i] = u[i] + dt * drift + moll.sigma(u[i]) * dW.values[i] / g.dx;
    }
    u = S.apply(w);
  }
  CHECK((xc - (2.0 * x1 - 0.5 * x2)).abs().maxCoeff() <= 1e-10);
}
