#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

#include "shew/heat_kernel.hpp"
#include "shew/stats.hpp"

using namespace shew;
using namespace shew::testing;

TEST_CASE("kernel identities: mass, symmetry, representation agreement") {
  CircleGrid g = grid64();
  for (double t : {0.01, 0.1, 1.0}) {
    double mass_err = 0.0, rep_err = 0.0;
    for (int i = 0; i < g.n_x; ++i) {
      double mass = 0.0;
      for (int j = 0; j < g.n_x; ++j) mass += kernel_value(t, g.node(i), g.node(j)) * g.dx;
      mass_err = std::max(mass_err, std::abs(mass - 1.0));
      rep_err = std::max(rep_err, std::abs(kernel_value(t, g.node(i), 0.0, KernelRep::Spectral) -
                                           kernel_value(t, g.node(i), 0.0, KernelRep::Image)));
      CHECK(kernel_value(t, g.node(i), 1.3) ==
            doctest::Approx(kernel_value(t, 1.3, g.node(i))).epsilon(1e-14));
    }
    CHECK(mass_err <= 1e-10);
    CHECK(rep_err <= 1e-10);
  }
  CHECK_THROWS_AS(kernel_value(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("kernel values are nonnegative") {
  for (double t : {0.003, 0.01, 0.1, 0.7, 2.0})
    for (int m = 0; m < 40; ++m) {
      double d = kTwoPi * m / 40.0;
      CHECK(kernel_value(t, d, 0.0, KernelRep::Image) >= 0.0);
      CHECK(kernel_value(t, d, 0.0, KernelRep::Spectral) >= -1e-13);
    }
}

TEST_CASE("semigroup: identity, eigenfunction decay, composition, mass") {
  CircleGrid g = grid64();
  Field r = random_field(g, 1.0, 11);

  Field same = apply_semigroup(r, 0.0);
  CHECK((same.values == r.values).all());

  Field cosx = make_field(g, [](double x) { return std::cos(x); });
  Field flowed = apply_semigroup(cosx, 1.0);
  CHECK(sup_norm(Field{g, flowed.values - std::exp(-1.0) * cosx.values, 0}) <= 1e-12);

  Field two_step = apply_semigroup(apply_semigroup(r, 0.4), 0.35);
  Field one_step = apply_semigroup(r, 0.75);
  CHECK(sup_norm(Field{g, two_step.values - one_step.values, 0}) <= 1e-12);

  for (double t : {0.01, 0.3, 2.0})
    CHECK(apply_semigroup(r, t).values.mean() == doctest::Approx(r.values.mean()).epsilon(1e-12));

  CHECK_THROWS_AS(apply_semigroup(r, -0.1), std::invalid_argument);
}

TEST_CASE("semigroup positivity and maximum principle in the resolved regime") {
  // The spectral kernel is entrywise positive once the e^{-k^2 t} tail is below
  // roundoff at the Nyquist frequency; below that scale it has genuine negative
  // lobes, which is why the solver offers the discrete-Laplacian variant.
  CircleGrid g = grid64();
  for (double t : {0.05, 0.3, 2.0}) {
    Semigroup S(g, t);
    for (std::uint64_t key : {1u, 2u, 3u}) {
      Field f = random_field(g, 1.0, key);
      Field nonneg{g, f.values.abs(), 0.0};
      CHECK(S.apply(nonneg).values.minCoeff() >= -1e-12);
      CHECK(S.apply(f).values.maxCoeff() <= f.values.maxCoeff() + 1e-12);
      CHECK(S.apply(f).values.minCoeff() >= f.values.minCoeff() - 1e-12);
    }
  }
}

TEST_CASE("discrete-Laplacian semigroup kernel is entrywise nonnegative at any dt") {
  CircleGrid g = grid64();
  for (double dt : {1e-4, 1e-3, 1e-2}) {
    Semigroup S(g, dt, LaplacianKind::DiscreteLaplacian);
    CHECK(S.matrix().minCoeff() >= 0.0);
    for (int i = 0; i < g.n_x; ++i)
      CHECK(S.matrix().row(i).sum() == doctest::Approx(1.0).epsilon(1e-14));
    // spectral and discrete-Laplacian agree on well-resolved modes
    CHECK(S.multiplier(1) == doctest::Approx(std::exp(-dt)).epsilon(2e-3));
  }
}

TEST_CASE("stochastic convolution: degenerate cases") {
  CircleGrid g = grid32();
  const double dt = 1e-2;
  const int K = 100;
  FieldPath zeros{g, {}, Mat::Zero(K, g.n_x)};
  FieldPath ones{g, {}, Mat::Constant(K, g.n_x, 1.0)};
  for (int k = 0; k < K; ++k) {
    zeros.times.push_back(k * dt);
    ones.times.push_back(k * dt);
  }
  std::vector<NoiseIncrement> noise;
  for (int k = 0; k < K; ++k)
    noise.push_back(sample_increment(g, dt, SeedSpec{5, 0, StreamTag::W1}, k));

  // zero drift, zero sigma -> identically zero
  FieldPath v0 = stochastic_convolution(zeros, zeros, noise);
  CHECK(sup_norm(v0) == 0.0);

  // drift 1, sigma 0, T = 1 -> v(.,1) = 1 (constants are heat-flow invariant)
  FieldPath v1 = stochastic_convolution(ones, zeros, noise);
  CHECK(sup_norm(Field{g, v1.values.row(K).array().transpose() - 1.0, 0}) <= 1e-10);

  FieldPath short_path{g, {0.0}, Mat::Zero(1, g.n_x)};
  CHECK_THROWS_AS(stochastic_convolution(short_path, zeros, noise), std::invalid_argument);
}

namespace {

// Quadrature oracle for Var v(x,t) = int_0^t int G_{t-s}(x,y)^2 dy ds,
// independent of the stepping scheme: inner integral by a fine rectangle rule,
// outer integral regularized by tau = q^2 (the integrand has a 1/sqrt tail).
double variance_oracle(double T) {
  const int nq = 2001, ny = 1024;
  const double dy = kTwoPi / ny;
  const double qmax = std::sqrt(T);
  double acc = 0.0;
  for (int iq = 0; iq < nq; ++iq) {
    double q = qmax * iq / (nq - 1);
    double tau = std::max(q * q, 1e-12);
    double inner = 0.0;
    for (int j = 0; j < ny; ++j) {
      double gt = kernel_value(tau, j * dy, 0.0, KernelRep::Image);
      inner += gt * gt * dy;
    }
    double w = (iq == 0 || iq == nq - 1) ? 0.5 : 1.0;  // trapezoid in q
    acc += w * 2.0 * q * inner * (qmax / (nq - 1));
  }
  return acc;
}

}  // namespace

TEST_CASE("stochastic convolution variance matches the kernel-squared quadrature oracle") {
  CircleGrid g = CircleGrid::with_nodes(48);
  const double dt = 2.5e-4, T = 1.0;
  const int K = static_cast<int>(T / dt);
  const int reps = 3000;
  Semigroup S(g, dt);

  double oracle = variance_oracle(T);

  // pooled per-node variance at the final time over replicas
  std::vector<double> sum(static_cast<size_t>(g.n_x), 0.0), sq(static_cast<size_t>(g.n_x), 0.0);
  for (int r = 0; r < reps; ++r) {
    Vec v = Vec::Zero(g.n_x);
    SeedSpec s{909, r, StreamTag::W1};
    for (int k = 0; k < K; ++k) {
      NoiseIncrement inc = sample_increment(g, dt, s, k);
      v = S.apply(v + inc.values / g.dx);
    }
    for (int i = 0; i < g.n_x; ++i) {
      sum[static_cast<size_t>(i)] += v[i];
      sq[static_cast<size_t>(i)] += v[i] * v[i];
    }
  }
  double var = 0.0;
  for (int i = 0; i < g.n_x; ++i) {
    double m = sum[static_cast<size_t>(i)] / reps;
    var += sq[static_cast<size_t>(i)] / reps - m * m;
  }
  var /= g.n_x;
  CHECK(std::abs(var - oracle) / oracle <= 0.05);
}

TEST_CASE("holder regularity of the convolution is insensitive to the drift choice") {
  CircleGrid g = grid32();
  const double dt = 4e-3;
  const int K = 250, reps = 100;
  Semigroup S(g, dt);
  auto q99_for_drift = [&](double drift) {
    std::vector<double> ys;
    for (int r = 0; r < reps; ++r) {
      Vec v = Vec::Zero(g.n_x);
      FieldPath path{g, {}, Mat(K + 1, g.n_x)};
      path.times.push_back(0);
      path.values.row(0).setZero();
      SeedSpec s{4242, r, StreamTag::W1};
      for (int k = 0; k < K; ++k) {
        NoiseIncrement inc = sample_increment(g, dt, s, k);
        v = S.apply(v + dt * drift + inc.values / g.dx);
        path.times.push_back((k + 1) * dt);
        path.values.row(k + 1) = v.matrix().transpose();
      }
      ys.push_back(holder_norm(path, 0.2));
    }
    return stats::quantile(ys, 0.99);
  };
  double a = q99_for_drift(0.0);
  double b = q99_for_drift(0.8);  // bounded drift within wall scale
  CHECK(a > 0.0);
  CHECK(b / a >= 0.8);
  CHECK(b / a <= 1.25);
}
