#include "shew/heat_kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace shew {

namespace {

constexpr double kTailTol = 1e-16;

int spectral_truncation(double t) {
  // e^{-K^2 t} <= kTailTol
  return static_cast<int>(std::ceil(std::sqrt(-std::log(kTailTol) / t))) + 1;
}

int image_truncation(double t) {
  return static_cast<int>(std::ceil(6.0 * std::sqrt(t) / kTwoPi)) + 2;
}

}  // namespace

double kernel_value(double t, double x, double y, KernelRep rep) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel_value: t must be positive");
  if (rep == KernelRep::Auto) rep = (t < 0.5) ? KernelRep::Image : KernelRep::Spectral;
  const double d = x - y;
  if (rep == KernelRep::Spectral) {
    const int K = spectral_truncation(t);
    double sum = 1.0;
    for (int k = 1; k <= K; ++k) sum += 2.0 * std::exp(-static_cast<double>(k) * k * t) * std::cos(k * d);
    return sum / kTwoPi;
  }
  const int M = image_truncation(t);
  const double pref = 1.0 / std::sqrt(2.0 * kTwoPi * t);
  double sum = 0.0;
  for (int m = -M; m <= M; ++m) {
    double z = d + kTwoPi * m;
    sum += pref * std::exp(-z * z / (4.0 * t));
  }
  return sum;
}

Semigroup::Semigroup(const CircleGrid& grid, double t, LaplacianKind kind)
    : grid_(grid), t_(t), kind_(kind), matrix_(grid.n_x, grid.n_x) {
  if (t < 0.0) throw std::invalid_argument("Semigroup: t must be nonnegative");
  const int n = grid.n_x;
  if (t == 0.0) {
    matrix_.setIdentity();
    return;
  }
  Vec row(n);
  for (int m = 0; m < n; ++m) {
    double theta = m * grid.dx;
    double sum = multiplier(0);
    for (int k = 1; k <= (n - 1) / 2; ++k) sum += 2.0 * multiplier(k) * std::cos(k * theta);
    if (n % 2 == 0) sum += multiplier(n / 2) * std::cos((n / 2) * theta);
    row[m] = sum / n;
  }
  if (kind_ == LaplacianKind::DiscreteLaplacian) {
    // The discrete-Laplacian kernel is analytically positive; clip the roundoff
    // in the far tail and renormalize so rows sum to one exactly.
    row = row.max(0.0);
    row /= row.sum();
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) matrix_(i, j) = row[((i - j) % n + n) % n];
}

double Semigroup::multiplier(int k) const {
  if (kind_ == LaplacianKind::Spectral) return std::exp(-static_cast<double>(k) * k * t_);
  double s = std::sin(0.5 * k * grid_.dx);
  return std::exp(-4.0 * s * s / (grid_.dx * grid_.dx) * t_);
}

Vec Semigroup::apply(const Vec& values) const {
  return (matrix_ * values.matrix()).array();
}

Field Semigroup::apply(const Field& f) const {
  require_same_grid(f.grid, grid_, "Semigroup::apply");
  return Field{f.grid, apply(f.values), f.time};
}

Field apply_semigroup(const Field& f, double t) {
  if (t < 0.0) throw std::invalid_argument("apply_semigroup: t must be nonnegative");
  if (t == 0.0) return f;
  return Semigroup(f.grid, t).apply(f);
}

FieldPath stochastic_convolution(const FieldPath& drift_path, const FieldPath& sigma_path,
                                 const std::vector<NoiseIncrement>& noise_path) {
  const int K = static_cast<int>(noise_path.size());
  if (drift_path.steps() < K || sigma_path.steps() < K)
    throw std::invalid_argument("stochastic_convolution: misaligned paths");
  require_same_grid(drift_path.grid, sigma_path.grid, "stochastic_convolution");
  const CircleGrid grid = drift_path.grid;
  if (K == 0) throw std::invalid_argument("stochastic_convolution: empty noise path");
  const double dt = noise_path.front().dt;

  Semigroup S(grid, dt);
  FieldPath out{grid, {}, Mat(K + 1, grid.n_x)};
  Vec v = Vec::Zero(grid.n_x);
  out.times.push_back(0.0);
  out.values.row(0) = v.matrix().transpose();
  for (int k = 0; k < K; ++k) {
    require_same_grid(noise_path[static_cast<size_t>(k)].grid, grid, "stochastic_convolution");
    Vec w = v + dt * drift_path.values.row(k).array().transpose() +
            sigma_path.values.row(k).array().transpose() *
                noise_path[static_cast<size_t>(k)].values / grid.dx;
    v = S.apply(w);
    out.times.push_back((k + 1) * dt);
    out.values.row(k + 1) = v.matrix().transpose();
  }
  return out;
}

}  // namespace shew
