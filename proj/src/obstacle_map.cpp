#include "shew/obstacle_map.hpp"

#include <cmath>

namespace shew {

ObstacleSolution solve_obstacle(const ObstacleProblem& prob) {
  const CircleGrid grid = prob.forcing.grid;
  require_same_grid(prob.initial.grid, grid, "solve_obstacle");
  require_same_grid(prob.walls.grid(), grid, "solve_obstacle");
  const Vec& h1 = prob.walls.lower.values;
  const Vec& h2 = prob.walls.upper.values;
  if (((h1 - prob.initial.values).maxCoeff() > 1e-12) ||
      ((prob.initial.values - h2).maxCoeff() > 1e-12))
    throw std::invalid_argument("solve_obstacle: initial datum violates the walls");
  const int K = prob.forcing.steps() - 1;
  if (K < 1) throw std::invalid_argument("solve_obstacle: forcing path needs >= 2 slices");
  const double dt = prob.forcing.times[1] - prob.forcing.times[0];

  Semigroup S(grid, dt);
  ObstacleSolution sol{FieldPath{grid, prob.forcing.times, Mat(K + 1, grid.n_x)},
                       FieldPath{grid, prob.forcing.times, Mat(K + 1, grid.n_x)},
                       ReflectionMeasures{Mat::Zero(K, grid.n_x), Mat::Zero(K, grid.n_x)}};
  Vec u = prob.initial.values.min(h2).max(h1);
  Vec flow = u;  // heat flow of g, for the shifted view u_bar
  sol.u.values.row(0) = u.matrix().transpose();
  sol.u_bar.values.row(0) = (u - flow).matrix().transpose();
  for (int k = 0; k < K; ++k) {
    Vec v_next = prob.forcing.values.row(k + 1).array().transpose();
    Vec v_cur = prob.forcing.values.row(k).array().transpose();
    Vec a = S.apply(u) + (v_next - S.apply(v_cur));
    sol.measures.eta.row(k) = ((h1 - a).max(0.0) * grid.dx).matrix().transpose();
    sol.measures.xi.row(k) = ((a - h2).max(0.0) * grid.dx).matrix().transpose();
    u = a.max(h1).min(h2);
    flow = S.apply(flow);
    sol.u.values.row(k + 1) = u.matrix().transpose();
    sol.u_bar.values.row(k + 1) = (u - flow).matrix().transpose();
  }
  return sol;
}

double lipschitz_probe(const FieldPath& v1, const FieldPath& v2, const Field& g,
                       const WallPair& walls) {
  if (v1.steps() != v2.steps()) throw std::invalid_argument("lipschitz_probe: mesh mismatch");
  require_same_grid(v1.grid, v2.grid, "lipschitz_probe");
  double denom = (v1.values - v2.values).array().abs().maxCoeff();
  if (denom == 0.0) return 0.0;
  ObstacleSolution s1 = solve_obstacle({v1, g, walls});
  ObstacleSolution s2 = solve_obstacle({v2, g, walls});
  double numer = (s1.u.values - s2.u.values).array().abs().maxCoeff();
  return numer / denom;
}

namespace {

// One projected trajectory driven by externally supplied cell increments,
// recording only the slices at the coarse stride.
Mat projected_with_noise(const Field& u0, const WallPair& walls, const PenalizedParams& p,
                         const std::vector<Vec>& noise, int record_every) {
  ReflectedSolver solver(walls, p);
  const int K = static_cast<int>(noise.size());
  Mat out(K / record_every + 1, u0.grid.n_x);
  Vec u = u0.values;
  out.row(0) = u.matrix().transpose();
  Vec eta, xi;
  for (int k = 0; k < K; ++k) {
    solver.advance(u, noise[static_cast<size_t>(k)], eta, xi);
    if ((k + 1) % record_every == 0) out.row((k + 1) / record_every) = u.matrix().transpose();
  }
  return out;
}

}  // namespace

CompositionReport continuity_composition_check(const Field& g, const WallPair& walls, double T,
                                               const PenalizedParams& p, const SeedSpec& seeds) {
  PenalizedParams proj = p;
  proj.scheme = Scheme::Projected;
  TrajectoryRecord rec = run_reflected(g, walls, T, proj, seeds);

  // Rebuild the mild-form forcing v from the realized trajectory and the same
  // noise, then push it through the obstacle map.
  const CircleGrid grid = g.grid;
  const int K = rec.path.steps() - 1;
  Semigroup S(grid, proj.dt, proj.laplacian);
  FieldPath v{grid, rec.path.times, Mat(K + 1, grid.n_x)};
  Vec vk = Vec::Zero(grid.n_x);
  v.values.row(0) = vk.matrix().transpose();
  const double inv_dx = 1.0 / grid.dx;
  for (int k = 0; k < K; ++k) {
    Vec u_k = rec.path.values.row(k).array().transpose();
    NoiseIncrement dW = sample_increment(grid, proj.dt, rec.stream, k);
    Vec w(grid.n_x);
    for (int i = 0; i < grid.n_x; ++i)
      w[i] = vk[i] + proj.dt * proj.f(u_k[i]) + proj.sigma(u_k[i]) * dW.values[i] * inv_dx;
    vk = S.apply(w);
    v.values.row(k + 1) = vk.matrix().transpose();
  }
  ObstacleSolution sol = solve_obstacle({v, g, walls});

  CompositionReport rep;
  rep.composition_sup_distance = (sol.u.values - rec.path.values).array().abs().maxCoeff();
  rep.tolerance = 5.0 * std::sqrt(proj.dt);

  // dt-refinement study on a shared Brownian path (finest increments summed up).
  const double dtf = proj.dt / 4.0;
  const int Kf = 4 * K;
  std::vector<Vec> fine(static_cast<size_t>(Kf));
  for (int k = 0; k < Kf; ++k)
    fine[static_cast<size_t>(k)] = sample_increment(grid, dtf, rec.stream, k).values;
  std::vector<Vec> mid(static_cast<size_t>(2 * K)), coarse(static_cast<size_t>(K));
  for (int k = 0; k < 2 * K; ++k) mid[static_cast<size_t>(k)] = fine[2 * k] + fine[2 * k + 1];
  for (int k = 0; k < K; ++k) coarse[static_cast<size_t>(k)] = mid[2 * k] + mid[2 * k + 1];

  PenalizedParams p4 = proj;
  p4.dt = dtf;
  PenalizedParams p2 = proj;
  p2.dt = proj.dt / 2.0;
  Mat u_coarse = projected_with_noise(g, walls, proj, coarse, 1);
  Mat u_mid = projected_with_noise(g, walls, p2, mid, 2);
  Mat u_fine = projected_with_noise(g, walls, p4, fine, 4);
  rep.refinement_coarse = (u_coarse - u_mid).array().abs().maxCoeff();
  rep.refinement_fine = (u_mid - u_fine).array().abs().maxCoeff();
  rep.refinement_ratio =
      rep.refinement_fine > 0 ? rep.refinement_coarse / rep.refinement_fine : 0.0;
  return rep;
}

}  // namespace shew
