#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace shew {

/// Scalar drift or diffusion coefficient with its declared Lipschitz constant
/// and (optional) bounds. The declared constants are what downstream modules
/// rely on; validate_lipschitz spot-checks them.
struct ScalarCoefficient {
  std::string name = "zero";
  std::function<double(double)> fn = [](double) { return 0.0; };
  double lipschitz = 0.0;
  double lower = -std::numeric_limits<double>::infinity();  // bound on the value
  double upper = std::numeric_limits<double>::infinity();

  double operator()(double z) const { return fn(z); }
  bool has_positive_floor() const { return lower > 0.0; }
};

namespace coefficients {

inline ScalarCoefficient zero() { return ScalarCoefficient{}; }

inline ScalarCoefficient constant(double c) {
  return ScalarCoefficient{"constant", [c](double) { return c; }, 0.0, c, c};
}

/// f(z) = a + b z.
inline ScalarCoefficient affine(double a, double b) {
  return ScalarCoefficient{"affine", [a, b](double z) { return a + b * z; }, std::abs(b)};
}

/// f(z) = a sin(w z); Lipschitz |a w|.
inline ScalarCoefficient sine(double a, double w = 1.0) {
  return ScalarCoefficient{"sine", [a, w](double z) { return a * std::sin(w * z); },
                           std::abs(a * w), -std::abs(a), std::abs(a)};
}

/// Smooth diffusion pinned inside [p1, p2]: sigma(z) = p1 + (p2-p1)(1+tanh z)/2.
inline ScalarCoefficient tanh_band(double p1, double p2) {
  if (!(0.0 < p1 && p1 <= p2)) throw std::invalid_argument("tanh_band: need 0 < p1 <= p2");
  return ScalarCoefficient{"tanh_band",
                           [p1, p2](double z) { return p1 + (p2 - p1) * 0.5 * (1.0 + std::tanh(z)); },
                           (p2 - p1) * 0.5, p1, p2};
}

}  // namespace coefficients

/// Sampled finite-difference check of the declared Lipschitz constant (F1).
/// Returns the largest sampled difference quotient.
double validate_lipschitz(const ScalarCoefficient& c, double lo, double hi, int samples = 2000,
                          double tolerance = 1e-9);

}  // namespace shew
