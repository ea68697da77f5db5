#include "shew/coupling.hpp"

#include <algorithm>
#include <cmath>

namespace shew {

std::pair<double, double> MixingCoefficients::at(double z) const {
  if (z < 0.0 || z > 1.0)
    throw std::invalid_argument("mixing: z outside [0,1]; clamp with |u-v| ^ 1 first");
  double f;
  if (n) {
    double inv = 1.0 / static_cast<double>(*n);
    f = std::sqrt(z + inv) - std::sqrt(inv);
  } else {
    f = std::sqrt(z);
  }
  double g = std::sqrt(std::max(0.0, 1.0 - f * f));
  return {f, g};
}

double tilted_drift(const ScalarCoefficient& f, double L, double t, double x) {
  double e = std::exp(-L * t);
  return e * f(x / e) - L * x;
}

namespace {

struct MixingEval {
  std::optional<int> n;
  double inv = 0.0;

  explicit MixingEval(std::optional<int> n_) : n(n_) {
    if (n) inv = 1.0 / static_cast<double>(*n);
  }

  // f_n at z already clamped to [0,1]
  double f(double z) const { return n ? std::sqrt(z + inv) - std::sqrt(inv) : std::sqrt(z); }
};

void check_sigma_floor(double value, double* seen) {
  *seen = std::min(*seen, value);
  if (value <= 0.0)
    throw std::invalid_argument("coupling: sigma must stay positive (sigma >= L0 > 0)");
}

}  // namespace

CoupledState step_coupled(const CoupledState& state, const NoiseIncrement& dW1,
                          const NoiseIncrement& dW2, std::optional<int> mixing_n,
                          const WallPair& walls, const PenalizedParams& p) {
  require_same_grid(state.u.grid, state.v.grid, "step_coupled");
  require_same_grid(state.u.grid, walls.grid(), "step_coupled");
  const CircleGrid grid = state.u.grid;
  const int n = grid.n_x;
  MixingEval mix(mixing_n);

  ReflectedSolver solver(walls, p);
  Vec mixed_cells(n);
  double floor_seen = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    check_sigma_floor(p.sigma(state.u.values[i]), &floor_seen);
    check_sigma_floor(p.sigma(state.v.values[i]), &floor_seen);
    double z = std::min(std::abs(state.u.values[i] - state.v.values[i]), 1.0);
    double fz = mix.f(z);
    double gz = std::sqrt(std::max(0.0, 1.0 - fz * fz));
    mixed_cells[i] = gz * dW1.values[i] + fz * dW2.values[i];
  }

  CoupledState next{Field{grid, state.u.values, state.u.time + p.dt},
                    Field{grid, state.v.values, state.v.time + p.dt}, state.ordered};
  Vec eta, xi;
  solver.advance(next.u.values, dW1.values, eta, xi);
  solver.advance(next.v.values, mixed_cells, eta, xi);
  if (state.ordered) next.v.values = next.v.values.min(next.u.values);
  return next;
}

namespace {

struct CoupledStepper {
  const CircleGrid grid;
  const CouplingParams& params;
  const ReflectedSolver solver;
  MixingEval mix;
  Vec eta, xi;  // scratch

  CoupledStepper(const WallPair& walls, const CouplingParams& p)
      : grid(walls.grid()), params(p), solver(walls, p.base), mix(p.mixing_n) {}

  // Returns the realized M-increment; enforces order and tracks the clamp.
  double advance_pair(Vec& u, Vec& v, const Vec& dW1, const Vec& dW2, double* max_clamp,
                      double* sigma_floor) {
    const int n = grid.n_x;
    const ScalarCoefficient& sigma = params.base.sigma;
    Vec mixed(n);
    double dM = 0.0;
    for (int i = 0; i < n; ++i) {
      double su = sigma(u[i]);
      double sv = sigma(v[i]);
      check_sigma_floor(su, sigma_floor);
      check_sigma_floor(sv, sigma_floor);
      double z = std::min(std::abs(u[i] - v[i]), 1.0);
      double fz = mix.f(z);
      double gz = std::sqrt(std::max(0.0, 1.0 - fz * fz));
      mixed[i] = gz * dW1[i] + fz * dW2[i];
      dM += su * dW1[i] - sv * mixed[i];
    }
    solver.advance(u, dW1, eta, xi);
    solver.advance(v, mixed, eta, xi);
    for (int i = 0; i < n; ++i) {
      if (v[i] > u[i]) {
        *max_clamp = std::max(*max_clamp, v[i] - u[i]);
        v[i] = u[i];
      }
    }
    return dM;
  }
};

}  // namespace

CoupledRun run_coupled_ordered(const Field& u0, const Field& v0, const WallPair& walls, double T,
                               const CouplingParams& params, const SeedSpec& seeds) {
  require_same_grid(u0.grid, v0.grid, "run_coupled_ordered");
  if ((v0.values - u0.values).maxCoeff() > 1e-12)
    throw std::invalid_argument("run_coupled_ordered: needs u0 >= v0 nodewise");
  const CircleGrid grid = u0.grid;
  const double dt = params.base.dt;
  const int K = static_cast<int>(std::llround(T / dt));
  const SeedSpec s1 = seeds.with_tag(StreamTag::W1);
  const SeedSpec s2 = seeds.with_tag(StreamTag::W2);

  CoupledStepper stepper(walls, params);
  CoupledRun run;
  CouplingDiagnostics& diag = run.diag;
  Vec u = u0.values.min(walls.upper.values).max(walls.lower.values);
  Vec v = v0.values.min(walls.upper.values).max(walls.lower.values);
  v = v.min(u);

  double M = 0.0, QV = 0.0;
  double min_gap = (u - v).minCoeff();
  auto record = [&](double t) {
    diag.times.push_back(t);
    diag.U.push_back((u - v).sum() * grid.dx);
    diag.M.push_back(M);
    diag.QV.push_back(QV);
    diag.sup_gap.push_back((u - v).abs().maxCoeff());
  };
  record(0.0);
  if ((u - v).abs().maxCoeff() <= params.zeta) {
    diag.coupled = true;
    diag.tau = 0.0;
    v = u;
  }

  const int stride = std::max(1, params.diagnostics_stride);
  for (int k = 0; k < K; ++k) {
    double dM = 0.0;
    if (diag.coupled) {
      // fused: v follows u exactly; the mixed noise coincides with dW1 at z = 0
      NoiseIncrement dW1 = sample_increment(grid, dt, s1, k);
      stepper.solver.advance(u, dW1.values, stepper.eta, stepper.xi);
      v = u;
    } else {
      NoiseIncrement dW1 = sample_increment(grid, dt, s1, k);
      NoiseIncrement dW2 = sample_increment(grid, dt, s2, k);
      dM = stepper.advance_pair(u, v, dW1.values, dW2.values, &diag.max_order_clamp,
                                &diag.sigma_floor_seen);
    }
    M += dM;
    QV += dM * dM;
    min_gap = std::min(min_gap, (u - v).minCoeff());
    double sup = (u - v).abs().maxCoeff();
    if (!diag.coupled && sup <= params.zeta) {
      diag.coupled = true;
      diag.tau = (k + 1) * dt;
      v = u;  // fuse
    }
    if ((k + 1) % stride == 0 || k + 1 == K) record((k + 1) * dt);
  }
  diag.min_state_gap = min_gap;
  run.u_final = Field{grid, u, T};
  run.v_final = Field{grid, v, T};
  return run;
}

QvReport qv_lower_bound_check(const CouplingDiagnostics& diag, double c0_est,
                              double u_threshold) {
  QvReport rep;
  rep.u_threshold = u_threshold;
  rep.c0_est = c0_est;
  std::vector<double> ratios;
  for (size_t k = 0; k + 1 < diag.times.size(); ++k) {
    double dt = diag.times[k + 1] - diag.times[k];
    double dQV = diag.QV[k + 1] - diag.QV[k];
    if (diag.U[k] > u_threshold && dt > 0.0) ratios.push_back(dQV / (diag.U[k] * dt));
  }
  rep.samples = static_cast<std::int64_t>(ratios.size());
  if (ratios.empty()) return rep;  // insufficient data (e.g. after coupling)
  rep.sufficient = true;
  std::sort(ratios.begin(), ratios.end());
  rep.percentile01 = ratios[static_cast<size_t>(0.01 * (ratios.size() - 1))];
  rep.median = ratios[ratios.size() / 2];
  rep.passes = rep.percentile01 >= c0_est;
  return rep;
}

GeneralCouplingReport run_coupled_general(const Field& u0_a, const Field& u0_b,
                                          const WallPair& walls, double T,
                                          const CouplingParams& params, const SeedSpec& seeds) {
  require_same_grid(u0_a.grid, u0_b.grid, "run_coupled_general");
  const CircleGrid grid = u0_a.grid;
  const double dt = params.base.dt;
  const int K = static_cast<int>(std::llround(T / dt));
  const SeedSpec s1 = seeds.with_tag(StreamTag::W1);
  const SeedSpec s2 = seeds.with_tag(StreamTag::W2);

  CoupledStepper stepper(walls, params);
  Vec v = u0_a.values.max(u0_b.values);  // dominating initial datum
  v = v.min(walls.upper.values).max(walls.lower.values);
  Vec u1 = u0_a.values.min(v);
  Vec u2 = u0_b.values.min(v);

  GeneralCouplingReport rep;
  bool c1 = false, c2 = false;
  if ((v - u1).abs().maxCoeff() <= params.zeta) { c1 = true; rep.tau_pair1 = 0.0; u1 = v; }
  if ((v - u2).abs().maxCoeff() <= params.zeta) { c2 = true; rep.tau_pair2 = 0.0; u2 = v; }
  if ((u1 - u2).abs().maxCoeff() <= params.zeta) rep.tau_combined = 0.0;
  double clamp = 0.0, floor_seen = std::numeric_limits<double>::infinity();
  const ScalarCoefficient& sigma = params.base.sigma;
  MixingEval mix(params.mixing_n);
  Vec mixed1(grid.n_x), mixed2(grid.n_x);
  for (int k = 0; k < K; ++k) {
    NoiseIncrement dW1 = sample_increment(grid, dt, s1, k);
    NoiseIncrement dW2 = sample_increment(grid, dt, s2, k);
    for (int i = 0; i < grid.n_x; ++i) {
      check_sigma_floor(sigma(v[i]), &floor_seen);
      double z1 = std::min(std::abs(v[i] - u1[i]), 1.0);
      double z2 = std::min(std::abs(v[i] - u2[i]), 1.0);
      double f1 = mix.f(z1), f2 = mix.f(z2);
      double g1 = std::sqrt(std::max(0.0, 1.0 - f1 * f1));
      double g2 = std::sqrt(std::max(0.0, 1.0 - f2 * f2));
      mixed1[i] = g1 * dW1.values[i] + f1 * dW2.values[i];
      mixed2[i] = g2 * dW1.values[i] + f2 * dW2.values[i];
    }
    stepper.solver.advance(v, dW1.values, stepper.eta, stepper.xi);
    if (c1) {
      u1 = v;
    } else {
      stepper.solver.advance(u1, mixed1, stepper.eta, stepper.xi);
      for (int i = 0; i < grid.n_x; ++i)
        if (u1[i] > v[i]) { clamp = std::max(clamp, u1[i] - v[i]); u1[i] = v[i]; }
    }
    if (c2) {
      u2 = v;
    } else {
      stepper.solver.advance(u2, mixed2, stepper.eta, stepper.xi);
      for (int i = 0; i < grid.n_x; ++i)
        if (u2[i] > v[i]) { clamp = std::max(clamp, u2[i] - v[i]); u2[i] = v[i]; }
    }
    double t = (k + 1) * dt;
    double gap1 = (v - u1).abs().maxCoeff();
    double gap2 = (v - u2).abs().maxCoeff();
    double gap12 = (u1 - u2).abs().maxCoeff();
    rep.triangle_violation = std::max(rep.triangle_violation, gap12 - gap1 - gap2);
    if (!c1 && gap1 <= params.zeta) { c1 = true; rep.tau_pair1 = t; u1 = v; }
    if (!c2 && gap2 <= params.zeta) { c2 = true; rep.tau_pair2 = t; u2 = v; }
    if (std::isnan(rep.tau_combined) && gap12 <= params.zeta) rep.tau_combined = t;
    if (k + 1 == K) rep.final_gap12 = gap12;
  }
  return rep;
}

CouplingSummary summarize_coupling(const std::vector<double>& taus,
                                   const std::vector<double>& horizons) {
  CouplingSummary s;
  s.horizons = horizons;
  const double n = static_cast<double>(taus.size());
  const double zc = 1.959963984540054;  // 95% normal quantile
  for (double h : horizons) {
    double hits = 0;
    for (double t : taus)
      if (std::isfinite(t) && t <= h) hits += 1;
    double p = n > 0 ? hits / n : 0.0;
    double denom = 1.0 + zc * zc / n;
    double center = (p + zc * zc / (2 * n)) / denom;
    double half = zc * std::sqrt(p * (1 - p) / n + zc * zc / (4 * n * n)) / denom;
    s.probability.push_back(p);
    s.ci_low.push_back(std::max(0.0, center - half));
    s.ci_high.push_back(std::min(1.0, center + half));
  }
  std::vector<double> finite;
  for (double t : taus)
    if (std::isfinite(t)) finite.push_back(t);
  std::sort(finite.begin(), finite.end());
  for (double q : {0.25, 0.5, 0.75})
    s.tau_quantiles.push_back(
        finite.empty() ? std::numeric_limits<double>::quiet_NaN()
                       : finite[static_cast<size_t>(q * (finite.size() - 1))]);
  return s;
}

}  // namespace shew
