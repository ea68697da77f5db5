#include "shew/ergodics.hpp"

#include <algorithm>
#include <cmath>

#include "shew/parallel.hpp"
#include "shew/stats.hpp"

namespace shew {

std::vector<Observable> default_observables(const CircleGrid& grid) {
  std::vector<Observable> obs;
  for (int q = 0; q < 4; ++q) {
    int idx = q * grid.n_x / 4;
    obs.push_back({"point" + std::to_string(q),
                   [idx](const Field& f) { return f.values[idx]; }});
  }
  obs.push_back({"mean", [](const Field& f) { return f.values.mean(); }});
  obs.push_back({"sup", [](const Field& f) { return f.values.maxCoeff(); }});
  return obs;
}

// ---------------------------------------------------------------------------
// bump profile

namespace {
constexpr int kBumpTable = 16385;

double bump_unnormalized(double r) {
  double s = 1.0 - r * r;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}
}  // namespace

BumpProfile::BumpProfile() : grid_(kBumpTable), cdf_(kBumpTable), ramp_(kBumpTable),
                             phi_(kBumpTable) {
  step_ = 2.0 / (kBumpTable - 1);
  for (int i = 0; i < kBumpTable; ++i) {
    grid_[i] = -1.0 + i * step_;
    phi_[i] = bump_unnormalized(grid_[i]);
  }
  // normalize by the trapezoid mass, then cumulative sums for cdf and the
  // right-tail first moment that builds the ramp
  double mass = 0.0;
  for (int i = 0; i + 1 < kBumpTable; ++i) mass += 0.5 * (phi_[i] + phi_[i + 1]) * step_;
  for (auto& p : phi_) p /= mass;
  cdf_[0] = 0.0;
  for (int i = 1; i < kBumpTable; ++i)
    cdf_[i] = cdf_[i - 1] + 0.5 * (phi_[i - 1] + phi_[i]) * step_;
  for (auto& c : cdf_) c /= cdf_.back();
  std::vector<double> m1tail(kBumpTable, 0.0);
  for (int i = kBumpTable - 2; i >= 0; --i)
    m1tail[i] = m1tail[i + 1] +
                0.5 * (grid_[i] * phi_[i] + grid_[i + 1] * phi_[i + 1]) * step_;
  for (int i = 0; i < kBumpTable; ++i)
    ramp_[i] = m1tail[i] - grid_[i] * (1.0 - cdf_[i]);
}

const BumpProfile& BumpProfile::instance() {
  static BumpProfile profile;
  return profile;
}

namespace {
double lerp_table(const std::vector<double>& ys, double step, double w) {
  double pos = (w + 1.0) / step;
  int i = static_cast<int>(pos);
  i = std::clamp(i, 0, static_cast<int>(ys.size()) - 2);
  double frac = pos - i;
  return ys[static_cast<size_t>(i)] * (1.0 - frac) + ys[static_cast<size_t>(i) + 1] * frac;
}
}  // namespace

double BumpProfile::cdf(double w) const {
  if (w <= -1.0) return 0.0;
  if (w >= 1.0) return 1.0;
  return lerp_table(cdf_, step_, w);
}

double BumpProfile::ramp(double w) const {
  if (w <= -1.0) return -w;  // below the support the ramp is exact: (r-w)^+ = r-w
  if (w >= 1.0) return 0.0;
  return lerp_table(ramp_, step_, w);
}

double BumpProfile::density(double w) const {
  if (w <= -1.0 || w >= 1.0) return 0.0;
  return lerp_table(phi_, step_, w);
}

// ---------------------------------------------------------------------------
// mollified scalars

MollifiedScalar::MollifiedScalar(const ScalarCoefficient& f, int bandwidth, double lo, double hi,
                                 int table_size)
    : n_(bandwidth), lo_(lo), hi_(hi) {
  if (bandwidth < 1) throw std::invalid_argument("MollifiedScalar: bandwidth must be >= 1");
  if (!(hi > lo)) throw std::invalid_argument("MollifiedScalar: empty range");
  step_ = (hi - lo) / (table_size - 1);
  val_.resize(static_cast<size_t>(table_size));
  der_.resize(static_cast<size_t>(table_size));
  // Simpson quadrature against the bump and its derivative:
  //   f_n(z)  = int phi(r) f(z - r/n) dr
  //   f_n'(z) = n int phi'(r) f(z - r/n) dr,  phi'(r) = phi(r) * (-2r)/(1-r^2)^2
  const int Q = 257;
  const double h = 2.0 / (Q - 1);
  std::vector<double> w(Q), phi(Q), dphi(Q);
  double mass = 0.0;
  for (int q = 0; q < Q; ++q) {
    double r = -1.0 + q * h;
    double simpson = (q == 0 || q == Q - 1) ? 1.0 : (q % 2 == 1 ? 4.0 : 2.0);
    w[static_cast<size_t>(q)] = simpson * h / 3.0;
    phi[static_cast<size_t>(q)] = bump_unnormalized(r);
    double s = 1.0 - r * r;
    dphi[static_cast<size_t>(q)] = s > 0 ? phi[static_cast<size_t>(q)] * (-2.0 * r) / (s * s) : 0.0;
    mass += w[static_cast<size_t>(q)] * phi[static_cast<size_t>(q)];
  }
  for (int t = 0; t < table_size; ++t) {
    double z = lo + t * step_;
    double v = 0.0, d = 0.0;
    for (int q = 0; q < Q; ++q) {
      double r = -1.0 + q * h;
      double fz = f(z - r / n_);
      v += w[static_cast<size_t>(q)] * phi[static_cast<size_t>(q)] * fz;
      d += w[static_cast<size_t>(q)] * dphi[static_cast<size_t>(q)] * fz;
    }
    val_[static_cast<size_t>(t)] = v / mass;
    der_[static_cast<size_t>(t)] = n_ * d / mass;
  }
}

double MollifiedScalar::value(double z) const {
  if (z <= lo_) return val_.front() + der_.front() * (z - lo_);
  if (z >= hi_) return val_.back() + der_.back() * (z - hi_);
  double pos = (z - lo_) / step_;
  int i = std::clamp(static_cast<int>(pos), 0, static_cast<int>(val_.size()) - 2);
  double frac = pos - i;
  return val_[static_cast<size_t>(i)] * (1.0 - frac) + val_[static_cast<size_t>(i) + 1] * frac;
}

double MollifiedScalar::deriv(double z) const {
  double zc = std::clamp(z, lo_, hi_);
  double pos = (zc - lo_) / step_;
  int i = std::clamp(static_cast<int>(pos), 0, static_cast<int>(der_.size()) - 2);
  double frac = pos - i;
  return der_[static_cast<size_t>(i)] * (1.0 - frac) + der_[static_cast<size_t>(i) + 1] * frac;
}

MollifiedCoefficients::MollifiedCoefficients(const ScalarCoefficient& f,
                                             const ScalarCoefficient& sigma,
                                             const WallPair& walls, int bandwidth,
                                             double range_margin)
    : n_(bandwidth),
      walls_(walls),
      f_n_(f, bandwidth, walls.lower.values.minCoeff() - range_margin,
           walls.upper.values.maxCoeff() + range_margin),
      sigma_n_(sigma, bandwidth, walls.lower.values.minCoeff() - range_margin,
               walls.upper.values.maxCoeff() + range_margin) {}

double MollifiedCoefficients::lower_penalty(double z, int node) const {
  double w = n_ * (z - walls_.lower.values[node]);
  return BumpProfile::instance().ramp(w) / n_;
}

double MollifiedCoefficients::lower_penalty_deriv(double z, int node) const {
  double w = n_ * (z - walls_.lower.values[node]);
  return -(1.0 - BumpProfile::instance().cdf(w));
}

double MollifiedCoefficients::upper_penalty(double z, int node) const {
  double w = -n_ * (z - walls_.upper.values[node]);
  return BumpProfile::instance().ramp(w) / n_;
}

double MollifiedCoefficients::upper_penalty_deriv(double z, int node) const {
  double w = -n_ * (z - walls_.upper.values[node]);
  return 1.0 - BumpProfile::instance().cdf(w);
}

// ---------------------------------------------------------------------------
// probes

namespace {

// Step a projected chain, invoking sink at the requested step indices.
void run_chain(const Field& u0, const WallPair& walls, const PenalizedParams& p,
               const SeedSpec& stream, const std::vector<int>& capture_steps,
               const std::function<void(size_t, const Vec&)>& sink) {
  ReflectedSolver solver(walls, p);
  const CircleGrid grid = u0.grid;
  Vec u = u0.values;
  Vec eta, xi;
  size_t next = 0;
  if (!capture_steps.empty() && capture_steps[0] == 0) {
    sink(0, u);
    next = 1;
  }
  const int K = capture_steps.empty() ? 0 : capture_steps.back();
  for (int k = 0; k < K; ++k) {
    NoiseIncrement dW = sample_increment(grid, p.dt, stream, k);
    solver.advance(u, dW.values, eta, xi);
    if (next < capture_steps.size() && capture_steps[next] == k + 1) {
      sink(next, u);
      ++next;
    }
  }
}

}  // namespace

OccupationSummary occupation_measure(const Field& u0, const WallPair& walls, double horizon,
                                     double burn_in, double stride_time,
                                     const std::vector<Observable>& observables,
                                     const PenalizedParams& p, const SeedSpec& seeds,
                                     int replicas, int threads) {
  if (!(horizon > burn_in)) throw std::invalid_argument("occupation_measure: burn_in >= horizon");
  const int k_burn = static_cast<int>(std::ceil(burn_in / p.dt));
  const int k_end = static_cast<int>(std::llround(horizon / p.dt));
  const int stride = std::max(1, static_cast<int>(std::llround(stride_time / p.dt)));
  std::vector<int> captures;
  for (int k = k_burn; k <= k_end; k += stride) captures.push_back(k);

  OccupationSummary sum;
  sum.burn_in = burn_in;
  sum.horizon = horizon;
  sum.stride_time = stride * p.dt;
  sum.replicas = replicas;
  for (const auto& o : observables) sum.observable_names.push_back(o.name);

  std::vector<std::vector<std::vector<double>>> per_replica(
      static_cast<size_t>(replicas),
      std::vector<std::vector<double>>(observables.size()));
  parallel_replicas(replicas, [&](int r) {
    auto& slots = per_replica[static_cast<size_t>(r)];
    run_chain(u0, walls, p, seeds.with_replica(r).with_tag(StreamTag::W1), captures,
              [&](size_t, const Vec& u) {
                Field f{u0.grid, u, 0.0};
                for (size_t o = 0; o < observables.size(); ++o)
                  slots[o].push_back(observables[o].fn(f));
              });
  }, threads);

  sum.samples.resize(observables.size());
  for (size_t o = 0; o < observables.size(); ++o) {
    for (int r = 0; r < replicas; ++r) {
      const auto& v = per_replica[static_cast<size_t>(r)][o];
      sum.samples[o].insert(sum.samples[o].end(), v.begin(), v.end());
    }
    std::sort(sum.samples[o].begin(), sum.samples[o].end());
  }
  return sum;
}

TwoChainReport two_chain_tv_proxy(const Field& u0_a, const Field& u0_b, const WallPair& walls,
                                  const std::vector<double>& t_list, int replicas,
                                  const PenalizedParams& p, const SeedSpec& seeds,
                                  std::optional<int> coupling_mixing_n, int threads) {
  require_same_grid(u0_a.grid, u0_b.grid, "two_chain_tv_proxy");
  std::vector<Observable> observables = default_observables(u0_a.grid);
  std::vector<int> captures;
  for (double t : t_list) captures.push_back(static_cast<int>(std::llround(t / p.dt)));

  TwoChainReport rep;
  rep.t_list = t_list;
  for (const auto& o : observables) rep.observable_names.push_back(o.name);
  rep.ks_null_band = stats::ks_null_band(static_cast<size_t>(replicas),
                                         static_cast<size_t>(replicas));

  // samples[chain][t][observable][replica]
  auto make_store = [&] {
    return std::vector<std::vector<std::vector<double>>>(
        t_list.size(), std::vector<std::vector<double>>(
                           observables.size(), std::vector<double>(static_cast<size_t>(replicas))));
  };
  auto store_a = make_store();
  auto store_b = make_store();

  parallel_replicas(replicas, [&](int r) {
    auto capture_into = [&](auto& store, const Field& u0, StreamTag tag) {
      run_chain(u0, walls, p, seeds.with_replica(r).with_tag(tag), captures,
                [&](size_t ti, const Vec& u) {
                  Field f{u0.grid, u, 0.0};
                  for (size_t o = 0; o < observables.size(); ++o)
                    store[ti][o][static_cast<size_t>(r)] = observables[o].fn(f);
                });
    };
    capture_into(store_a, u0_a, StreamTag::W1);
    capture_into(store_b, u0_b, StreamTag::W2);
  }, threads);

  rep.ks.resize(t_list.size());
  for (size_t ti = 0; ti < t_list.size(); ++ti)
    for (size_t o = 0; o < observables.size(); ++o)
      rep.ks[ti].push_back(stats::ks_distance(store_a[ti][o], store_b[ti][o]));

  // coupled-gap probability from the coupling construction on the same pair
  const bool a_ge_b = ((u0_a.values - u0_b.values).minCoeff() >= -1e-12);
  const bool b_ge_a = ((u0_b.values - u0_a.values).minCoeff() >= -1e-12);
  std::vector<double> taus(static_cast<size_t>(replicas));
  CouplingParams cp;
  cp.base = p;
  cp.base.scheme = Scheme::Projected;
  cp.mixing_n = coupling_mixing_n;
  cp.diagnostics_stride = 1 << 20;  // only tau is needed
  double horizon = t_list.empty() ? 0.0 : *std::max_element(t_list.begin(), t_list.end());
  parallel_replicas(replicas, [&](int r) {
    SeedSpec rs = seeds.with_replica(r + (1 << 20));  // decouple from the KS chains
    if (a_ge_b || b_ge_a) {
      const Field& hi = a_ge_b ? u0_a : u0_b;
      const Field& lo = a_ge_b ? u0_b : u0_a;
      taus[static_cast<size_t>(r)] = run_coupled_ordered(hi, lo, walls, horizon, cp, rs).diag.tau;
    } else {
      taus[static_cast<size_t>(r)] =
          run_coupled_general(u0_a, u0_b, walls, horizon, cp, rs).tau_combined;
    }
  }, threads);
  for (double t : t_list) {
    double beyond = 0;
    for (double tau : taus)
      if (!(tau <= t)) beyond += 1;  // NaN counts as not yet coupled
    rep.gap_probability.push_back(beyond / static_cast<double>(replicas));
  }
  return rep;
}

TightnessReport tightness_stats(const std::vector<Field>& g_list, double alpha, double kappa,
                                int replicas, const WallPair& walls, const PenalizedParams& p,
                                double T, const SeedSpec& seeds, int threads) {
  const double exponent = alpha - kappa;
  if (!(exponent > 0.0 && exponent < 0.25))
    throw std::invalid_argument("tightness_stats: alpha - kappa must lie in (0, 1/4)");
  if (g_list.empty()) throw std::invalid_argument("tightness_stats: no initial data");
  const CircleGrid grid = g_list.front().grid;
  const int K = static_cast<int>(std::llround(T / p.dt));

  TightnessReport rep;
  rep.alpha = alpha;
  rep.kappa = kappa;
  rep.replicas = replicas;

  Mat y(static_cast<int>(g_list.size()), replicas);
  parallel_replicas(replicas, [&](int r) {
    const SeedSpec stream = seeds.with_replica(r).with_tag(StreamTag::W1);
    for (size_t gi = 0; gi < g_list.size(); ++gi) {
      // reflected chain driving the stochastic convolution, common noise per replica
      ReflectedSolver solver(walls, p);
      Semigroup S(grid, p.dt, p.laplacian);
      Vec u = g_list[gi].values;
      Vec v = Vec::Zero(grid.n_x);
      FieldPath vpath{grid, {}, Mat(K + 1, grid.n_x)};
      vpath.times.push_back(0.0);
      vpath.values.row(0) = v.matrix().transpose();
      Vec eta, xi, w(grid.n_x);
      const double inv_dx = 1.0 / grid.dx;
      for (int k = 0; k < K; ++k) {
        NoiseIncrement dW = sample_increment(grid, p.dt, stream, k);
        for (int i = 0; i < grid.n_x; ++i)
          w[i] = v[i] + p.dt * p.f(u[i]) + p.sigma(u[i]) * dW.values[i] * inv_dx;
        v = S.apply(w);
        solver.advance(u, dW.values, eta, xi);
        vpath.times.push_back((k + 1) * p.dt);
        vpath.values.row(k + 1) = v.matrix().transpose();
      }
      y(static_cast<int>(gi), r) = holder_norm(vpath, exponent);
    }
  }, threads);

  for (int gi = 0; gi < y.rows(); ++gi) {
    double acc = 0.0;
    std::vector<double> ys(static_cast<size_t>(replicas));
    for (int r = 0; r < replicas; ++r) {
      acc += std::pow(y(gi, r), 1.0 / kappa);
      ys[static_cast<size_t>(r)] = y(gi, r);
    }
    rep.moments.push_back(std::pow(acc / replicas, kappa));
    rep.y_q99.push_back(stats::quantile(ys, 0.99));
  }
  double lo = *std::min_element(rep.moments.begin(), rep.moments.end());
  double hi = *std::max_element(rep.moments.begin(), rep.moments.end());
  rep.moment_ratio = (lo == 0.0) ? (hi == 0.0 ? 1.0 : std::numeric_limits<double>::infinity())
                                 : hi / lo;
  return rep;
}

StrongFellerReport strong_feller_probe(const Observable& phi, double phi_sup, const Field& g1,
                                       const Field& g2, const WallPair& walls,
                                       const std::vector<double>& t_list, int replicas,
                                       const PenalizedParams& p, const SeedSpec& seeds,
                                       int threads) {
  if (!(p.sigma.lower > 0.0) || !std::isfinite(p.sigma.upper))
    throw std::invalid_argument("strong_feller_probe: needs declared 0 < p1 <= |sigma| <= p2");
  Field dg{g1.grid, g1.values - g2.values, 0.0};
  const double dg_h = l2_norm(dg);
  if (dg_h == 0.0) throw std::invalid_argument("strong_feller_probe: g1 = g2");

  std::vector<int> captures;
  for (double t : t_list) captures.push_back(static_cast<int>(std::llround(t / p.dt)));
  Mat phi1(static_cast<int>(t_list.size()), replicas), phi2(phi1.rows(), replicas);
  parallel_replicas(replicas, [&](int r) {
    run_chain(g1, walls, p, seeds.with_replica(r).with_tag(StreamTag::W1), captures,
              [&](size_t ti, const Vec& u) {
                phi1(static_cast<int>(ti), r) = phi.fn(Field{g1.grid, u, 0.0});
              });
    run_chain(g2, walls, p, seeds.with_replica(r).with_tag(StreamTag::W2), captures,
              [&](size_t ti, const Vec& u) {
                phi2(static_cast<int>(ti), r) = phi.fn(Field{g2.grid, u, 0.0});
              });
  }, threads);

  StrongFellerReport rep;
  rep.t_grid = t_list;
  rep.dg_h = dg_h;
  std::vector<double> log_t, log_r, log_r_se;
  for (size_t ti = 0; ti < t_list.size(); ++ti) {
    double m1 = phi1.row(static_cast<int>(ti)).mean();
    double m2 = phi2.row(static_cast<int>(ti)).mean();
    double v1 = (phi1.row(static_cast<int>(ti)).array() - m1).square().sum() / (replicas - 1);
    double v2 = (phi2.row(static_cast<int>(ti)).array() - m2).square().sum() / (replicas - 1);
    double se = std::sqrt((v1 + v2) / replicas);
    double diff = std::abs(m1 - m2);
    double scale = std::sqrt(t_list[ti]) / (phi_sup * dg_h);
    rep.diff.push_back(diff);
    rep.diff_se.push_back(se);
    rep.ratio.push_back(diff * scale);
    rep.ratio_se.push_back(se * scale);
    // floor the estimate at its own noise level so the log fit stays defined;
    // flooring can only make the fitted slope less negative (conservative)
    double floored = std::max(diff, se);
    if (floored > 0.0) {
      log_t.push_back(std::log(t_list[ti]));
      log_r.push_back(std::log(floored * scale));
      log_r_se.push_back(se / floored);
    }
  }
  if (log_t.size() >= 2) {
    auto fit = stats::fit_slope(log_t, log_r, log_r_se);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_stderr;
  }
  return rep;
}

DerivativeFlowReport derivative_flow(const Field& u0, const Field& ubar0,
                                     const MollifiedCoefficients& moll, double epsilon,
                                     double delta, double T, double dt, const SeedSpec& seeds,
                                     int replicas, double fd_h, int threads) {
  const CircleGrid grid = u0.grid;
  if (dt > std::min(epsilon, delta))
    throw std::invalid_argument("derivative_flow: explicit penalty needs dt <= min(eps, delta)");
  const int K = static_cast<int>(std::llround(T / dt));
  const int record_every = std::max(1, K / 50);
  const double ubar_h2 = l2_inner(ubar0, ubar0);

  Semigroup S(grid, dt);
  const double inv_dx = 1.0 / grid.dx;
  auto base_step = [&](Vec& u, const Vec& dW) {
    Vec w(grid.n_x);
    for (int i = 0; i < grid.n_x; ++i) {
      double drift = moll.f(u[i]) + moll.lower_penalty(u[i], i) / delta -
                     moll.upper_penalty(u[i], i) / epsilon;
      w[i] = u[i] + dt * drift + moll.sigma(u[i]) * dW[i] * inv_dx;
    }
    u = S.apply(w);
    if (!u.isFinite().all()) throw BlowupError("derivative_flow: base trajectory blew up");
  };
  auto flow_step = [&](const Vec& u, Vec& x, const Vec& dW) {
    Vec w(grid.n_x);
    for (int i = 0; i < grid.n_x; ++i) {
      double lin = moll.f_deriv(u[i]) + moll.lower_penalty_deriv(u[i], i) / delta -
                   moll.upper_penalty_deriv(u[i], i) / epsilon;
      w[i] = x[i] + dt * lin * x[i] + moll.sigma_deriv(u[i]) * x[i] * dW[i] * inv_dx;
    }
    x = S.apply(w);
  };

  std::vector<double> times;
  for (int k = record_every; k <= K; k += record_every) times.push_back(k * dt);
  Mat x2(static_cast<int>(times.size()), replicas);
  std::vector<double> fd_err(1, 0.0);

  parallel_replicas(replicas, [&](int r) {
    const SeedSpec stream = seeds.with_replica(r).with_tag(StreamTag::W1);
    Vec u = u0.values, x = ubar0.values;
    Vec u_h = u0.values + fd_h * ubar0.values;  // shared-noise shifted trajectory
    int row = 0;
    for (int k = 0; k < K; ++k) {
      NoiseIncrement dW = sample_increment(grid, dt, stream, k);
      flow_step(u, x, dW.values);
      base_step(u, dW.values);
      if (r == 0) base_step(u_h, dW.values);
      if ((k + 1) % record_every == 0 && row < static_cast<int>(times.size())) {
        x2(row, r) = (x * x).sum() * grid.dx;
        ++row;
      }
    }
    if (r == 0) {
      Vec fd = (u_h - u) / fd_h;
      fd_err[0] = std::sqrt((fd - x).square().sum() / std::max(1e-300, x.square().sum()));
    }
  }, threads);

  DerivativeFlowReport rep;
  rep.times = times;
  rep.fd_h = fd_h;
  rep.fd_rel_error = fd_err[0];
  double sup = 0.0;
  for (int ti = 0; ti < x2.rows(); ++ti) {
    double m = x2.row(ti).mean();
    rep.mean_x2.push_back(m);
    sup = std::max(sup, m);
  }
  rep.sup_ratio = sup / ubar_h2;
  return rep;
}

}  // namespace shew
