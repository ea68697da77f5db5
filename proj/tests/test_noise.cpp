#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_support.hpp"

#include "shew/stats.hpp"

using namespace shew;
using namespace shew::testing;

TEST_CASE("determinism and stream separation") {
  CircleGrid g = grid64();
  SeedSpec s{12345, 3, StreamTag::W1};
  NoiseIncrement a = sample_increment(g, 1e-3, s, 17);
  NoiseIncrement b = sample_increment(g, 1e-3, s, 17);
  CHECK((a.values == b.values).all());  // bitwise identical

  NoiseIncrement c = sample_increment(g, 1e-3, s, 18);
  CHECK_FALSE((a.values == c.values).all());
  NoiseIncrement d = sample_increment(g, 1e-3, s.with_tag(StreamTag::W2), 17);
  CHECK_FALSE((a.values == d.values).all());
  NoiseIncrement e = sample_increment(g, 1e-3, s.with_replica(4), 17);
  CHECK_FALSE((a.values == e.values).all());

  CHECK_THROWS_AS(sample_increment(g, 0.0, s, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_increment(g, -1.0, s, 0), std::invalid_argument);
}

TEST_CASE("pooled increment variance sits in the 99% chi-square interval") {
  CircleGrid g = grid64();
  const double dt = 1e-3;
  SeedSpec s{777, 0, StreamTag::W1};
  const int steps = 1563;  // 1563 * 64 = 100032 pooled draws
  double sum_sq = 0.0;
  std::int64_t n = 0;
  for (int k = 0; k < steps; ++k) {
    NoiseIncrement inc = sample_increment(g, dt, s, k);
    sum_sq += (inc.values * inc.values).sum();
    n += g.n_x;
  }
  const double cell_var = g.dx * dt;
  double statistic = sum_sq / cell_var;  // ~ chi^2_n
  double lo = stats::chi2_quantile(static_cast<double>(n), 0.005);
  double hi = stats::chi2_quantile(static_cast<double>(n), 0.995);
  CHECK(statistic >= lo);
  CHECK(statistic <= hi);
}

TEST_CASE("W1 and W2 streams are uncorrelated") {
  CircleGrid g = grid64();
  SeedSpec s{2024, 0, StreamTag::W1};
  std::vector<double> w1, w2;
  for (int k = 0; k < 1563; ++k) {
    NoiseIncrement a = sample_increment(g, 1e-3, s, k);
    NoiseIncrement b = sample_increment(g, 1e-3, s.with_tag(StreamTag::W2), k);
    for (int i = 0; i < g.n_x; ++i) {
      w1.push_back(a.values[i]);
      w2.push_back(b.values[i]);
    }
  }
  CHECK(std::abs(stats::pearson_correlation(w1, w2)) <= 0.01);
}

TEST_CASE("white noise pairing") {
  CircleGrid g = grid64();
  SeedSpec s{99, 0, StreamTag::W1};
  Field zero = constant_field(g, 0.0);
  NoiseIncrement inc = sample_increment(g, 1e-3, s, 0);
  CHECK(white_noise_pairing(inc, zero) == 0.0);

  Field wrong{CircleGrid::with_nodes(32), Vec::Zero(32), 0.0};
  CHECK_THROWS_AS(white_noise_pairing(inc, wrong), std::invalid_argument);
}

TEST_CASE("pairing variance: constant, indicator, and Ito isometry") {
  CircleGrid g = grid64();
  const double dt = 1e-3;
  SeedSpec s{31337, 0, StreamTag::W1};
  Field one = constant_field(g, 1.0);
  Field indicator = constant_field(g, 0.0);
  indicator.values[5] = 1.0;
  Field shaped = make_field(g, [](double x) { return std::cos(2 * x) + 0.3; });

  const int reps = 40000;
  std::vector<double> p1, p2, p3;
  for (int k = 0; k < reps; ++k) {
    NoiseIncrement inc = sample_increment(g, dt, s, k);
    p1.push_back(white_noise_pairing(inc, one));
    p2.push_back(white_noise_pairing(inc, indicator));
    p3.push_back(white_noise_pairing(inc, shaped));
  }
  auto sample_var = [](const std::vector<double>& xs) {
    auto ms = stats::mean_stderr(xs);
    double v = 0.0;
    for (double x : xs) v += (x - ms.mean) * (x - ms.mean);
    return v / (static_cast<double>(xs.size()) - 1);
  };
  auto check_var = [&](const std::vector<double>& xs, double expected) {
    double v = sample_var(xs);
    double se = expected * std::sqrt(2.0 / static_cast<double>(xs.size()));
    CHECK(std::abs(v - expected) <= 3.0 * se);
  };
  // mean zero within 3 standard errors
  auto m1 = stats::mean_stderr(p1);
  CHECK(std::abs(m1.mean) <= 3.0 * m1.stderr_);
  check_var(p1, kTwoPi * dt);      // sum of cell variances = n dx dt
  check_var(p2, g.dx * dt);        // single-cell isometry
  double iso = 0.0;                // Ito isometry: dx dt sum phi_i^2
  for (int i = 0; i < g.n_x; ++i) iso += shaped.values[i] * shaped.values[i];
  check_var(p3, iso * g.dx * dt);
}

TEST_CASE("seed manifest json") {
  SeedManifest m{42, 7};
  CHECK(m.to_json() ==
        "{\"master_seed\":42,\"replicas\":7,\"stream_tags\":[\"W1\",\"W2\",\"AUX\"]}");
}
