#pragma once

#include <vector>

#include "shew/circle_domain.hpp"
#include "shew/noise.hpp"

namespace shew {

enum class KernelRep { Spectral, Image, Auto };

/// Periodic heat kernel G_t(x,y) on the circle.
///   spectral: (1/2pi) sum_{|k|<=K} e^{-k^2 t} cos(k(x-y))
///   image:    sum_{|m|<=M} (4 pi t)^{-1/2} exp(-(x-y+2 pi m)^2 / (4t))
/// Truncations keep the dropped tail below 1e-14. Auto picks image for t < 0.5.
double kernel_value(double t, double x, double y, KernelRep rep = KernelRep::Auto);

/// Eigenvalue family for the grid semigroup.
///   Spectral:          lambda_k = k^2 (exact trigonometric eigenvalues)
///   DiscreteLaplacian: lambda_k = 4 sin^2(k dx / 2) / dx^2, the 3-point stencil.
/// The discrete-Laplacian exponential has an entrywise nonnegative kernel, so it
/// preserves nodewise ordering exactly; the spectral kernel develops small
/// negative lobes when t is below the grid resolution scale.
enum class LaplacianKind { Spectral, DiscreteLaplacian };

/// Precomputed grid heat semigroup e^{t Delta}: a symmetric circulant matrix.
class Semigroup {
 public:
  Semigroup(const CircleGrid& grid, double t, LaplacianKind kind = LaplacianKind::Spectral);

  Vec apply(const Vec& values) const;
  Field apply(const Field& f) const;

  const Mat& matrix() const { return matrix_; }
  const CircleGrid& grid() const { return grid_; }
  double time() const { return t_; }
  double multiplier(int k) const;  // eigenvalue multiplier for frequency k

 private:
  CircleGrid grid_;
  double t_;
  LaplacianKind kind_;
  Mat matrix_;
};

/// Heat flow of a field: spectral multiplier e^{-k^2 t} on its grid Fourier
/// coefficients. t = 0 returns the input unchanged.
Field apply_semigroup(const Field& f, double t);

/// Mild-form stochastic convolution: starting from v_0 = 0,
///   v_{k+1} = S_dt(v_k + dt * drift_k + sigma_k .* dW_k / dx),
/// with drift_k, sigma_k the k-th slices of the given paths. The /dx converts
/// cell mass to nodal density. Returns the path (v_0, ..., v_K).
FieldPath stochastic_convolution(const FieldPath& drift_path, const FieldPath& sigma_path,
                                 const std::vector<NoiseIncrement>& noise_path);

}  // namespace shew
