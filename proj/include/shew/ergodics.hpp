#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shew/circle_domain.hpp"
#include "shew/coupling.hpp"
#include "shew/noise.hpp"
#include "shew/reflected_solver.hpp"

namespace shew {

struct Observable {
  std::string name;
  std::function<double(const Field&)> fn;
};

/// Point evaluations at four fixed nodes, the spatial mean, and the sup.
std::vector<Observable> default_observables(const CircleGrid& grid);

// ---------------------------------------------------------------------------
// Mollified coefficients (smooth surrogates for the penalty kinks)

/// Smooth bump phi(r) = C exp(-1/(1-r^2)) on [-1,1] with unit integral,
/// tabulated once: its CDF and the ramp profile K(w) = int phi(r) (r-w)^+ dr.
class BumpProfile {
 public:
  static const BumpProfile& instance();

  double cdf(double w) const;    // int_{-1}^{w} phi
  double ramp(double w) const;   // K(w); equals -w for w <= -1, 0 for w >= 1
  double density(double w) const;

 private:
  BumpProfile();
  std::vector<double> grid_, cdf_, ramp_, phi_;
  double step_;
};

/// One mollified scalar map f_n(z) = n int phi(n(z-y)) f(y) dy with its exact
/// derivative, tabulated over a range and interpolated with cubic Hermite.
class MollifiedScalar {
 public:
  MollifiedScalar(const ScalarCoefficient& f, int bandwidth, double lo, double hi,
                  int table_size = 4097);

  double value(double z) const;
  double deriv(double z) const;
  int bandwidth() const { return n_; }

 private:
  int n_;
  double lo_, hi_, step_;
  std::vector<double> val_, der_;
};

/// The smooth coefficient family of the strong-Feller argument: f_n, sigma_n,
/// and the wall penalties k_n(z,x) ~ (z-h1(x))^-, l_n(z,x) ~ (z-h2(x))^+ with
/// exact-sign derivatives d/dz k_n <= 0 <= d/dz l_n.
class MollifiedCoefficients {
 public:
  MollifiedCoefficients(const ScalarCoefficient& f, const ScalarCoefficient& sigma,
                        const WallPair& walls, int bandwidth, double range_margin = 3.0);

  double f(double z) const { return f_n_.value(z); }
  double f_deriv(double z) const { return f_n_.deriv(z); }
  double sigma(double z) const { return sigma_n_.value(z); }
  double sigma_deriv(double z) const { return sigma_n_.deriv(z); }

  double lower_penalty(double z, int node) const;        // k_n(z, x_node) >= 0
  double lower_penalty_deriv(double z, int node) const;  // in [-1, 0]
  double upper_penalty(double z, int node) const;        // l_n(z, x_node) >= 0
  double upper_penalty_deriv(double z, int node) const;  // in [0, 1]

  int bandwidth() const { return n_; }
  const WallPair& walls() const { return walls_; }

 private:
  int n_;
  WallPair walls_;
  MollifiedScalar f_n_, sigma_n_;
};

// ---------------------------------------------------------------------------
// Probes

struct OccupationSummary {
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> samples;  // sorted, pooled across replicas
  double burn_in = 0.0;
  double horizon = 0.0;
  double stride_time = 0.0;
  int replicas = 0;
};

/// Strided time averages after burn-in, pooled across replicas: the empirical
/// occupation law of each observable.
OccupationSummary occupation_measure(const Field& u0, const WallPair& walls, double horizon,
                                     double burn_in, double stride_time,
                                     const std::vector<Observable>& observables,
                                     const PenalizedParams& p, const SeedSpec& seeds,
                                     int replicas, int threads = 0);

struct TwoChainReport {
  std::vector<double> t_list;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> ks;  // [t][observable]
  double ks_null_band = 0.0;
  std::vector<double> gap_probability;  // P(sup|u1-u2| > zeta) at each t
};

/// Kolmogorov-Smirnov distances between the laws of two chains started from
/// different initial data (independent noises), plus the coupled-gap
/// probability from the coupling construction.
TwoChainReport two_chain_tv_proxy(const Field& u0_a, const Field& u0_b, const WallPair& walls,
                                  const std::vector<double>& t_list, int replicas,
                                  const PenalizedParams& p, const SeedSpec& seeds,
                                  std::optional<int> coupling_mixing_n = {}, int threads = 0);

struct TightnessReport {
  std::vector<double> moments;  // (mean Y^{1/kappa})^{kappa} per initial datum
  std::vector<double> y_q99;    // empirical 99th percentile of Y per datum
  double moment_ratio = 0.0;    // max / min
  double alpha = 0.0, kappa = 0.0;
  int replicas = 0;
};

/// Hoelder-norm statistics of the stochastic convolution v(.,.,g) on [0,T] for
/// several initial data, with common noise across the data (the bound's
/// constant is initial-condition free).
TightnessReport tightness_stats(const std::vector<Field>& g_list, double alpha, double kappa,
                                int replicas, const WallPair& walls, const PenalizedParams& p,
                                double T, const SeedSpec& seeds, int threads = 0);

struct StrongFellerReport {
  std::vector<double> t_grid;
  std::vector<double> diff;      // |E phi(u(t,g1)) - E phi(u(t,g2))|
  std::vector<double> diff_se;
  std::vector<double> ratio;     // diff * sqrt(t) / (phi_sup * |g1-g2|_H)
  std::vector<double> ratio_se;
  double slope = 0.0;            // log ratio vs log t
  double slope_se = 0.0;
  double dg_h = 0.0;
};

/// Monte Carlo estimate of the Lipschitz-in-initial-condition ratio
/// |P_t phi(g1) - P_t phi(g2)| sqrt(t) / (||phi|| |g1-g2|_H) on a time grid,
/// independent noise per chain.
StrongFellerReport strong_feller_probe(const Observable& phi, double phi_sup, const Field& g1,
                                       const Field& g2, const WallPair& walls,
                                       const std::vector<double>& t_list, int replicas,
                                       const PenalizedParams& p, const SeedSpec& seeds,
                                       int threads = 0);

struct DerivativeFlowReport {
  std::vector<double> times;
  std::vector<double> mean_x2;   // E |X(t)|_H^2 over replicas
  double sup_ratio = 0.0;        // sup_t E|X(t)|_H^2 / |ubar0|_H^2
  double fd_rel_error = 0.0;     // linearized flow vs finite difference, shared noise
  double fd_h = 0.0;
};

/// Directional-derivative flow X of the mollified penalized dynamics along a
/// frozen base trajectory (same noise), with the finite-difference consistency
/// probe (u(u0 + h ubar0) - u(u0)) / h.
DerivativeFlowReport derivative_flow(const Field& u0, const Field& ubar0,
                                     const MollifiedCoefficients& moll, double epsilon,
                                     double delta, double T, double dt, const SeedSpec& seeds,
                                     int replicas, double fd_h = 1e-4, int threads = 0);

}  // namespace shew
