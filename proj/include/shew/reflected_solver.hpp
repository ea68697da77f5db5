#pragma once

#include <optional>
#include <vector>

#include "shew/circle_domain.hpp"
#include "shew/coefficients.hpp"
#include "shew/heat_kernel.hpp"
#include "shew/noise.hpp"

namespace shew {

/// Raised when a trajectory produces non-finite values; the step is rejected.
struct BlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Scheme { Penalized, Projected };

struct PenalizedParams {
  double epsilon = 1e-2;  // upper-wall penalty strength 1/epsilon
  double delta = 1e-2;    // lower-wall penalty strength 1/delta
  double dt = 1e-3;
  ScalarCoefficient f = coefficients::zero();
  ScalarCoefficient sigma = coefficients::zero();
  Scheme scheme = Scheme::Projected;
  LaplacianKind laplacian = LaplacianKind::Spectral;

  void validate() const;
};

/// Cell masses of the reflection measures, one row per recorded interval.
/// Masses already carry the dx (and per-step time extent) factors, so totals
/// are direct sums.
struct ReflectionMeasures {
  Mat eta;  // pushes up off the lower wall
  Mat xi;   // pushes down off the upper wall

  double eta_total() const { return eta.size() ? eta.sum() : 0.0; }
  double xi_total() const { return xi.size() ? xi.sum() : 0.0; }
};

struct TrajectoryRecord {
  FieldPath path;
  ReflectionMeasures measures;
  SeedSpec stream;
  SeedManifest seeds;
  PenalizedParams params;
  WallPair walls;
  double horizon = 0.0;
  int record_stride = 1;
};

struct StepResult {
  Field state;
  Vec eta_slice;
  Vec xi_slice;
};

/// One trajectory's stepping engine; precomputes the dt-semigroup once.
class ReflectedSolver {
 public:
  ReflectedSolver(WallPair walls, PenalizedParams params);

  /// Free (heat + drift + noise) substep shared by both schemes.
  Vec free_step(const Vec& u, const Vec& noise_cells) const;

  /// Implicit per-node penalty solve applied to a free-step output.
  Vec penalty_solve(const Vec& free) const;

  /// Advance one step in place; returns the measure slices.
  void advance(Vec& u, const Vec& noise_cells, Vec& eta_slice, Vec& xi_slice) const;

  const Semigroup& semigroup() const { return semigroup_; }
  const WallPair& walls() const { return walls_; }
  const PenalizedParams& params() const { return params_; }

 private:
  WallPair walls_;
  PenalizedParams params_;
  Semigroup semigroup_;
};

/// Single penalized step (operator splitting, implicit penalty).
Field step_penalized(const Field& u, const WallPair& walls, const NoiseIncrement& dW,
                     const PenalizedParams& p);

/// Single projected step: free step, clip to the walls, measure slices from the
/// clipping residuals.
StepResult step_projected(const Field& u, const WallPair& walls, const NoiseIncrement& dW,
                          const PenalizedParams& p);

struct RunOptions {
  int record_stride = 1;
  StreamTag noise_tag = StreamTag::W1;
};

/// Time-step the reflected (or penalized) dynamics up to T, recording states
/// every record_stride steps and accumulating measure masses per recorded
/// interval.
TrajectoryRecord run_reflected(const Field& u0, const WallPair& walls, double T,
                               const PenalizedParams& p, const SeedSpec& seeds,
                               const RunOptions& options = {});

/// Pathwise sandwich bounds from the penalized comparison argument:
///   u >= v - sup_{s<=t} (v - h2)^+   and   u <= v + sup_{s<=t} (v - h1)^-,
/// where v re-runs the free dynamics with the recorded trajectory frozen in the
/// coefficients and the same noise.
struct SandwichReport {
  double lower_violation = 0.0;  // max over time of (v - Phi_bar) - u
  double upper_violation = 0.0;  // max over time of u - (v + Psi_bar)
  double phi_bar_final = 0.0;
  bool phi_bar_monotone = true;
};

SandwichReport sandwich_check(const TrajectoryRecord& record, const SeedSpec& seeds);

/// Joint (epsilon, delta) halving ladder against the projected reference on a
/// frozen noise path, plus a delta-only ladder at fixed epsilon for the
/// pathwise monotone-family check.
struct SweepReport {
  std::vector<double> epsilons;
  std::vector<double> deltas;
  std::vector<double> sup_distance;        // D_j vs projected
  double delta_family_min_gap = 0.0;       // min over consecutive delta pairs of
                                           // (u_{delta/2} - u_delta); >= -tol when monotone
  double delta_family_max_gap = 0.0;
  bool orientation_up = true;              // trajectories rise as delta decreases
};

SweepReport convergence_sweep(const Field& u0, const WallPair& walls, double T,
                              const PenalizedParams& base, int levels, const SeedSpec& seeds);

/// Discrete residual of the weak-form identity (test function phi with its
/// second derivative phi''):
///   (u(T),phi) - (u0,phi) - int (u,phi'')ds - int (f(u),phi)ds
///   - int phi sigma(u) dW - int phi d(eta) + int phi d(xi).
/// Requires a stride-1 record.
std::vector<double> weak_form_residual(const TrajectoryRecord& record,
                                       const std::vector<std::pair<Field, Field>>& phi_phipp);

/// Max complementarity residual over a record:
///   max(sum (u-h1) eta, sum (h2-u) xi) per step, plus wall violations.
struct ComplementarityReport {
  double lower_residual = 0.0;
  double upper_residual = 0.0;
  double wall_violation = 0.0;
  double min_measure = 0.0;
};

ComplementarityReport complementarity_check(const TrajectoryRecord& record);

}  // namespace shew
