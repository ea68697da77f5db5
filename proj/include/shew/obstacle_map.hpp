#pragma once

#include "shew/circle_domain.hpp"
#include "shew/noise.hpp"
#include "shew/reflected_solver.hpp"

namespace shew {

/// Deterministic double-obstacle problem: given a forcing path v on a uniform
/// time mesh and initial datum g, produce the wall-constrained solution with
/// minimal reflection measures.
struct ObstacleProblem {
  FieldPath forcing;  // v(., t_k), t_0 = 0
  Field initial;      // g
  WallPair walls;
};

struct ObstacleSolution {
  FieldPath u;
  FieldPath u_bar;  // u minus the heat flow of g (the paper's shifted view)
  ReflectionMeasures measures;
};

/// Per-step clipping realization of the obstacle map Phi:
///   u_0 = g,  u_{k+1} = clip(S_dt u_k + [v_{k+1} - S_dt v_k], h1, h2),
/// with measure slices from the clipping residuals. Exactly complementary at
/// every step and h1 <= u <= h2 exactly.
ObstacleSolution solve_obstacle(const ObstacleProblem& prob);

/// sup-norm Lipschitz quotient ||Phi(v1) - Phi(v2)||_inf / ||v1 - v2||_inf of
/// the obstacle map over the given time window (0 when v1 = v2).
double lipschitz_probe(const FieldPath& v1, const FieldPath& v2, const Field& g,
                       const WallPair& walls);

struct CompositionReport {
  double composition_sup_distance = 0.0;  // reflected run vs obstacle-map rebuild
  double tolerance = 0.0;                 // 5 sqrt(dt)
  double refinement_coarse = 0.0;         // ||u_dt - u_{dt/2}||_inf, shared noise
  double refinement_fine = 0.0;           // ||u_{dt/2} - u_{dt/4}||_inf
  double refinement_ratio = 0.0;          // coarse / fine, ~ sqrt(2)
};

/// Fixed-point consistency of the factorization u = Phi(v): rebuild the forcing
/// v of the mild form from a realized projected trajectory, re-solve the
/// obstacle problem with it, and compare. Also runs a dt-refinement study on a
/// shared Brownian path.
CompositionReport continuity_composition_check(const Field& g, const WallPair& walls, double T,
                                               const PenalizedParams& p, const SeedSpec& seeds);

}  // namespace shew
