#include "shew/reflected_solver.hpp"

#include <cmath>

namespace shew {

void PenalizedParams::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("PenalizedParams: epsilon must be positive");
  if (!(delta > 0.0)) throw std::invalid_argument("PenalizedParams: delta must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("PenalizedParams: dt must be positive");
}

double validate_lipschitz(const ScalarCoefficient& c, double lo, double hi, int samples,
                          double tolerance) {
  double worst = 0.0;
  double h = (hi - lo) / samples;
  for (int i = 0; i < samples; ++i) {
    double z = lo + i * h;
    double q = std::abs(c(z + h) - c(z)) / h;
    worst = std::max(worst, q);
  }
  if (worst > c.lipschitz + tolerance)
    throw std::invalid_argument("coefficient '" + c.name + "' violates its Lipschitz constant");
  return worst;
}

ReflectedSolver::ReflectedSolver(WallPair walls, PenalizedParams params)
    : walls_(std::move(walls)),
      params_(std::move(params)),
      semigroup_(walls_.grid(), params_.dt, params_.laplacian) {
  params_.validate();
}

Vec ReflectedSolver::free_step(const Vec& u, const Vec& noise_cells) const {
  const int n = walls_.grid().n_x;
  Vec w(n);
  const double dt = params_.dt;
  const double inv_dx = 1.0 / walls_.grid().dx;
  for (int i = 0; i < n; ++i)
    w[i] = u[i] + dt * params_.f(u[i]) + params_.sigma(u[i]) * noise_cells[i] * inv_dx;
  return semigroup_.apply(w);
}

Vec ReflectedSolver::penalty_solve(const Vec& free) const {
  const Vec& h1 = walls_.lower.values;
  const Vec& h2 = walls_.upper.values;
  const double rl = params_.dt / params_.delta;
  const double ru = params_.dt / params_.epsilon;
  Vec out(free.size());
  for (int i = 0; i < free.size(); ++i) {
    double a = free[i];
    if (a < h1[i])
      out[i] = (a + rl * h1[i]) / (1.0 + rl);
    else if (a > h2[i])
      out[i] = (a + ru * h2[i]) / (1.0 + ru);
    else
      out[i] = a;
  }
  return out;
}

void ReflectedSolver::advance(Vec& u, const Vec& noise_cells, Vec& eta_slice,
                              Vec& xi_slice) const {
  Vec a = free_step(u, noise_cells);
  if (!a.isFinite().all()) throw BlowupError("reflected step produced non-finite values");
  const double dx = walls_.grid().dx;
  if (params_.scheme == Scheme::Projected) {
    eta_slice = (walls_.lower.values - a).max(0.0) * dx;
    xi_slice = (a - walls_.upper.values).max(0.0) * dx;
    u = a.max(walls_.lower.values).min(walls_.upper.values);
  } else {
    Vec r = penalty_solve(a);
    eta_slice = (r - a).max(0.0) * dx;
    xi_slice = (a - r).max(0.0) * dx;
    u = std::move(r);
  }
}

Field step_penalized(const Field& u, const WallPair& walls, const NoiseIncrement& dW,
                     const PenalizedParams& p) {
  if (p.scheme != Scheme::Penalized)
    throw std::invalid_argument("step_penalized: params must select the penalized scheme");
  require_same_grid(u.grid, walls.grid(), "step_penalized");
  ReflectedSolver solver(walls, p);
  Vec state = u.values;
  Vec eta, xi;
  solver.advance(state, dW.values, eta, xi);
  return Field{u.grid, std::move(state), u.time + p.dt};
}

StepResult step_projected(const Field& u, const WallPair& walls, const NoiseIncrement& dW,
                          const PenalizedParams& p) {
  require_same_grid(u.grid, walls.grid(), "step_projected");
  const double tol = 1e-12;
  if (((walls.lower.values - u.values).maxCoeff() > tol) ||
      ((u.values - walls.upper.values).maxCoeff() > tol))
    throw std::invalid_argument("step_projected: input violates the walls");
  PenalizedParams q = p;
  q.scheme = Scheme::Projected;
  ReflectedSolver solver(walls, q);
  StepResult result{Field{u.grid, u.values, u.time + p.dt}, Vec(), Vec()};
  solver.advance(result.state.values, dW.values, result.eta_slice, result.xi_slice);
  return result;
}

TrajectoryRecord run_reflected(const Field& u0, const WallPair& walls, double T,
                               const PenalizedParams& p, const SeedSpec& seeds,
                               const RunOptions& options) {
  p.validate();
  require_same_grid(u0.grid, walls.grid(), "run_reflected");
  require_finite(u0.values, "run_reflected");
  const double tol = 1e-12;
  if (((walls.lower.values - u0.values).maxCoeff() > tol) ||
      ((u0.values - walls.upper.values).maxCoeff() > tol))
    throw std::invalid_argument("run_reflected: u0 violates (F2): h1 <= u0 <= h2");

  const CircleGrid grid = u0.grid;
  const int K = static_cast<int>(std::llround(T / p.dt));
  const int stride = std::max(1, options.record_stride);
  const int slices = K / stride + 1;
  const SeedSpec stream = seeds.with_tag(options.noise_tag);

  ReflectedSolver solver(walls, p);
  TrajectoryRecord rec{FieldPath{grid, {}, Mat(slices, grid.n_x)},
                       ReflectionMeasures{Mat::Zero(slices - 1, grid.n_x),
                                          Mat::Zero(slices - 1, grid.n_x)},
                       stream,
                       SeedManifest{seeds.master_seed, 1},
                       p,
                       walls,
                       T,
                       stride};

  Vec u = u0.values;
  rec.path.times.push_back(0.0);
  rec.path.values.row(0) = u.matrix().transpose();
  Vec eta, xi;
  int row = 0;
  for (int k = 0; k < K; ++k) {
    NoiseIncrement dW = sample_increment(grid, p.dt, stream, k);
    solver.advance(u, dW.values, eta, xi);
    if (row < slices - 1) {
      rec.measures.eta.row(row) += eta.matrix().transpose();
      rec.measures.xi.row(row) += xi.matrix().transpose();
    }
    if ((k + 1) % stride == 0) {
      ++row;
      rec.path.times.push_back((k + 1) * p.dt);
      rec.path.values.row(row) = u.matrix().transpose();
    }
  }
  return rec;
}

SandwichReport sandwich_check(const TrajectoryRecord& record, const SeedSpec& seeds) {
  if (record.params.scheme != Scheme::Penalized)
    throw std::invalid_argument("sandwich_check: record must come from the penalized scheme");
  if (record.record_stride != 1)
    throw std::invalid_argument("sandwich_check: record must have stride 1");
  if (!(seeds.with_tag(record.stream.tag) == record.stream))
    throw std::invalid_argument("sandwich_check: seed mismatch with the record's noise path");

  const CircleGrid grid = record.path.grid;
  const PenalizedParams& p = record.params;
  Semigroup S(grid, p.dt, p.laplacian);
  const Vec& h1 = record.walls.lower.values;
  const Vec& h2 = record.walls.upper.values;

  SandwichReport rep;
  Vec v = record.path.values.row(0).array().transpose();  // v(0) = u0
  double phi_bar = 0.0, psi_bar = 0.0, prev_phi = 0.0;
  const int K = record.path.steps() - 1;
  const double inv_dx = 1.0 / grid.dx;
  for (int k = 0; k < K; ++k) {
    Vec u_k = record.path.values.row(k).array().transpose();
    NoiseIncrement dW = sample_increment(grid, p.dt, record.stream, k);
    Vec w(grid.n_x);
    for (int i = 0; i < grid.n_x; ++i)
      w[i] = v[i] + p.dt * p.f(u_k[i]) + p.sigma(u_k[i]) * dW.values[i] * inv_dx;
    v = S.apply(w);
    prev_phi = phi_bar;
    phi_bar = std::max(phi_bar, (v - h2).maxCoeff());
    psi_bar = std::max(psi_bar, (h1 - v).maxCoeff());
    phi_bar = std::max(phi_bar, 0.0);
    psi_bar = std::max(psi_bar, 0.0);
    if (phi_bar < prev_phi) rep.phi_bar_monotone = false;
    Vec u_next = record.path.values.row(k + 1).array().transpose();
    rep.lower_violation = std::max(rep.lower_violation, ((v - phi_bar) - u_next).maxCoeff());
    rep.upper_violation = std::max(rep.upper_violation, (u_next - (v + psi_bar)).maxCoeff());
  }
  rep.phi_bar_final = phi_bar;
  return rep;
}

SweepReport convergence_sweep(const Field& u0, const WallPair& walls, double T,
                              const PenalizedParams& base, int levels, const SeedSpec& seeds) {
  PenalizedParams proj = base;
  proj.scheme = Scheme::Projected;
  TrajectoryRecord ref = run_reflected(u0, walls, T, proj, seeds);

  SweepReport rep;
  for (int j = 0; j < levels; ++j) {
    PenalizedParams pj = base;
    pj.scheme = Scheme::Penalized;
    pj.epsilon = base.epsilon * std::pow(2.0, -j);
    pj.delta = base.delta * std::pow(2.0, -j);
    TrajectoryRecord rj = run_reflected(u0, walls, T, pj, seeds);
    rep.epsilons.push_back(pj.epsilon);
    rep.deltas.push_back(pj.delta);
    rep.sup_distance.push_back((rj.path.values - ref.path.values).array().abs().maxCoeff());
  }

  // delta-only ladder at fixed epsilon: pathwise family ordering on shared noise.
  double mn = std::numeric_limits<double>::infinity();
  double mx = -mn;
  Mat prev;
  for (int j = 0; j < levels; ++j) {
    PenalizedParams pj = base;
    pj.scheme = Scheme::Penalized;
    pj.delta = base.delta * std::pow(2.0, -j);
    Mat cur = run_reflected(u0, walls, T, pj, seeds).path.values;
    if (j > 0) {
      Mat diff = cur - prev;  // smaller delta minus larger delta
      mn = std::min(mn, diff.minCoeff());
      mx = std::max(mx, diff.maxCoeff());
    }
    prev = std::move(cur);
  }
  rep.delta_family_min_gap = mn;
  rep.delta_family_max_gap = mx;
  rep.orientation_up = (mx >= -mn);
  return rep;
}

std::vector<double> weak_form_residual(const TrajectoryRecord& record,
                                       const std::vector<std::pair<Field, Field>>& phi_phipp) {
  if (record.record_stride != 1)
    throw std::invalid_argument("weak_form_residual: record must have stride 1");
  const CircleGrid grid = record.path.grid;
  const PenalizedParams& p = record.params;
  const double dx = grid.dx;
  const int K = record.path.steps() - 1;

  std::vector<double> residuals(phi_phipp.size(), 0.0);
  for (size_t m = 0; m < phi_phipp.size(); ++m) {
    const Vec& phi = phi_phipp[m].first.values;
    const Vec& phipp = phi_phipp[m].second.values;
    double acc = 0.0;
    for (int k = 0; k < K; ++k) {
      Vec u_k = record.path.values.row(k).array().transpose();
      NoiseIncrement dW = sample_increment(grid, p.dt, record.stream, k);
      double drift_term = 0.0, diff_term = 0.0, noise_term = 0.0;
      for (int i = 0; i < grid.n_x; ++i) {
        diff_term += u_k[i] * phipp[i];
        drift_term += p.f(u_k[i]) * phi[i];
        noise_term += phi[i] * p.sigma(u_k[i]) * dW.values[i];
      }
      acc += p.dt * dx * (diff_term + drift_term) + noise_term;
      acc += (phi * (record.measures.eta.row(k).array().transpose() -
                     record.measures.xi.row(k).array().transpose()))
                 .sum();
    }
    double lhs = ((record.path.values.row(K) - record.path.values.row(0)).array() *
                  phi.transpose())
                     .sum() *
                 dx;
    residuals[m] = lhs - acc;
  }
  return residuals;
}

ComplementarityReport complementarity_check(const TrajectoryRecord& record) {
  ComplementarityReport rep;
  const Vec h1 = record.walls.lower.values;
  const Vec h2 = record.walls.upper.values;
  const int rows = static_cast<int>(record.measures.eta.rows());
  for (int k = 0; k < rows; ++k) {
    Vec u = record.path.values.row(k + 1).array().transpose();
    Vec eta = record.measures.eta.row(k).array().transpose();
    Vec xi = record.measures.xi.row(k).array().transpose();
    rep.lower_residual = std::max(rep.lower_residual, ((u - h1) * eta).abs().maxCoeff());
    rep.upper_residual = std::max(rep.upper_residual, ((h2 - u) * xi).abs().maxCoeff());
    rep.min_measure = std::min({rep.min_measure, eta.minCoeff(), xi.minCoeff()});
    rep.wall_violation = std::max({rep.wall_violation, (h1 - u).maxCoeff(), (u - h2).maxCoeff()});
  }
  return rep;
}

}  // namespace shew
