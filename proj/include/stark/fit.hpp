#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "stark/error.hpp"

namespace stark {

/// Ordinary least squares y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  std::size_t samples = 0;

  /// Two-sigma confidence half-width of the slope.
  double half_width() const { return 2.0 * slope_stderr; }
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("fit", "fit_line", "need at least two paired samples");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw DomainError("fit", "fit_line", "abscissae are all equal");
  LineFit fit;
  fit.samples = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = y[i] - fit.intercept - fit.slope * x[i];
      rss += e * e;
    }
    const double s2 = rss / static_cast<double>(n - 2);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return fit;
}

/// Fit log|y| against log x; samples with y == 0 or non-finite logs are dropped.
inline LineFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double a = std::log(x[i]);
    const double b = std::log(std::abs(y[i]));
    if (std::isfinite(a) && std::isfinite(b)) {
      lx.push_back(a);
      ly.push_back(b);
    }
  }
  return fit_line(lx, ly);
}

}  // namespace stark
