#pragma once

// Test-only reference computations. Nothing here calls into the library's
// quadrature or special-function code, so agreement is a genuine cross-check.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// int_a^inf f by exp-sinh.
inline double half_line(const std::function<double(double)>& f, double a = 0.0) {
  boost::math::quadrature::exp_sinh<double> integrator;
  return integrator.integrate([&](double t) { return f(a + t); }, 1e-15);
}

/// int_a^b f by tanh-sinh (handles endpoint singularities).
inline double interval(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, 1e-14);
}

/// (1/2pi) int e^{i(s^3/3 + u s)} ds along rays rotated by `angle` into the
/// sectors where e^{i s^3/3} decays. Equals Ai(u).
inline double airy_contour(double u, double angle = std::numbers::pi / 8) {
  using C = std::complex<double>;
  auto integrand_on_ray = [&](double phi) {
    const C dir = std::polar(1.0, phi);
    return [=](double rho) {
      const C s = rho * dir;
      return std::exp(C(0, 1) * (s * s * s / 3.0 + u * s)) * dir;
    };
  };
  // right ray  s = rho e^{i angle},  left ray s = rho e^{i(pi - angle)} traversed inward
  auto right = integrand_on_ray(angle);
  auto left = integrand_on_ray(std::numbers::pi - angle);
  auto re = [&](double rho) { return (right(rho) - left(rho)).real(); };
  auto im = [&](double rho) { return (right(rho) - left(rho)).imag(); };
  // integrand is negligible well before rho = 12 for |u| <= 20
  const double upper = 6.0 + std::sqrt(std::abs(u)) * 2.5;
  const double value_re = interval(re, 0.0, upper);
  const double value_im = interval(im, 0.0, upper);
  (void)value_im;
  return value_re / (2.0 * std::numbers::pi);
}

/// Least-squares slope of y against x.
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
