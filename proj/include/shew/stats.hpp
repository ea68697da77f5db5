#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace shew {
namespace stats {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t count = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  r.count = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return r;
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v = xs.size() > 1 ? v / static_cast<double>(xs.size() - 1) : 0.0;
  r.mean = m;
  r.stderr_ = std::sqrt(v / static_cast<double>(xs.size()));
  return r;
}

inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  double pos = q * static_cast<double>(xs.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  size_t hi = std::min(lo + 1, xs.size() - 1);
  double w = pos - static_cast<double>(lo);
  return (1.0 - w) * xs[lo] + w * xs[hi];
}

/// Two-sample Kolmogorov-Smirnov distance sup_x |F_a(x) - F_b(x)|.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// Critical KS value c(alpha) sqrt((n+m)/(n m)); c = 1.36 at 5%, 1.63 at 1%,
/// 1.95 at 0.1%.
inline double ks_null_band(std::size_t n, std::size_t m, double c = 1.36) {
  return c * std::sqrt((static_cast<double>(n) + static_cast<double>(m)) /
                       (static_cast<double>(n) * static_cast<double>(m)));
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Wilson-Hilferty chi-square quantile approximation (excellent for large dof).
inline double chi2_quantile(double dof, double p) {
  // inverse normal via Acklam-style rational approximation through erfc is
  // overkill here; use a bisection on normal_cdf for the needed z.
  double lo = -10, hi = 10;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  double z = 0.5 * (lo + hi);
  double a = 2.0 / (9.0 * dof);
  double c = 1.0 - a + z * std::sqrt(a);
  return dof * c * c * c;
}

inline double pearson_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("pearson_correlation: size mismatch");
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) { ma += a[i]; mb += b[i]; }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(a.size());
  double sab = 0, sa = 0, sb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    sa += (a[i] - ma) * (a[i] - ma);
    sb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(sa * sb);
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = a + b x with optional per-point standard errors
/// on y propagated into the slope error (delta method).
inline SlopeFit fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& y_se = {}) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: bad input");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= n; my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (!y_se.empty()) {
    double var = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      double w = (x[i] - mx) / sxx;
      var += w * w * y_se[i] * y_se[i];
    }
    fit.slope_stderr = std::sqrt(var);
  } else {
    double rss = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

}  // namespace stats
}  // namespace shew
