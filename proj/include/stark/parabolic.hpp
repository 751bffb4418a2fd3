#pragma once

// Parabolic coordinates f = sqrt(fbreve(r + x)), g = y / f, the approximate
// phase theta = f^3/3 and the exact eikonal phase
//   theta1 = (4/3) sqrt(x + s) (x - s/2),   s = (x^2 - |y|^2)^{1/2},
// which solves |grad theta1|^2 / 2 = x.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "stark/error.hpp"

namespace stark::parabolic {

/// Convex C^3 mollifier: 1 for t <= 1/2, t for t >= 2. On [1/2, 2] its second
/// derivative is a Beta(3, 6) bump with unit mass and unit mean.
double mollifier(double t);

struct ParabolicPoint {
  double f = 1.0;
  std::vector<double> g;
};

/// Value, gradient, Hessian (row-major d x d) and Laplacian of a phase.
struct PhaseData {
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> hessian;
  double laplacian = 0.0;

  std::size_t dim() const { return gradient.size(); }
  double hess(std::size_t i, std::size_t j) const { return hessian[i * dim() + j]; }
};

/// True where r + x > 2, the regime in which f = sqrt(r + x) exactly.
bool in_identity_regime(double x, std::span<const double> y);

ParabolicPoint to_parabolic(double x, std::span<const double> y);

/// |det T'| for T(x, y) = (f, g); identity regime only.
double jacobian_det(double x, std::span<const double> y, int d);

/// theta = f^3/3 with closed-form derivatives; identity regime only.
PhaseData theta_calculus(double x, std::span<const double> y, int d);

/// theta1 with closed-form derivatives. Requires x > 0 and
/// x^2 - |y|^2 > 1e-12 x^2 (caustic margin).
PhaseData theta1_calculus(double x, std::span<const double> y);

/// theta1 - f^3/3; both domains must hold.
double theta1_minus_theta(double x, std::span<const double> y);

/// f1 = (3 theta1)^{1/3}.
double f1(double x, std::span<const double> y);

// Templated kernels shared with the classical module, which evaluates them in
// extended precision along long orbits.

template <class Real>
Real norm_squared(std::span<const Real> v) {
  Real s = 0;
  for (Real c : v) s += c * c;
  return s;
}

template <class Real>
void require_theta1_domain(Real x, Real y2, const char* op) {
  if (!(x > Real(0)) || !(x * x - y2 > Real(1e-12) * x * x))
    throw DomainError("parabolic", op, "point at or beyond the caustic x^2 = |y|^2");
}

/// grad theta1 = sqrt(x + s) (1, y / (x + s)).
template <class Real>
void theta1_gradient(Real x, std::span<const Real> y, std::span<Real> out) {
  const Real y2 = norm_squared(y);
  require_theta1_domain(x, y2, "theta1_gradient");
  const Real ay = std::sqrt(y2);
  const Real s = std::sqrt((x - ay) * (x + ay));
  const Real root = std::sqrt(x + s);
  out[0] = root;
  for (std::size_t i = 0; i < y.size(); ++i) out[i + 1] = y[i] / root;
}

/// grad f = (1/(2f)) (1 + x/r, y/r) in the identity regime.
template <class Real>
void f_gradient(Real x, std::span<const Real> y, std::span<Real> out) {
  const Real r = std::sqrt(x * x + norm_squared(y));
  const Real f2 = x >= Real(0) ? r + x : norm_squared(y) / (r - x);
  if (!(f2 > Real(2))) throw DomainError("parabolic", "f_gradient", "outside the identity regime r + x > 2");
  const Real f = std::sqrt(f2);
  // (1 + x/r)/(2f) = f/(2r)
  out[0] = f / (Real(2) * r);
  for (std::size_t i = 0; i < y.size(); ++i) out[i + 1] = y[i] / (Real(2) * f * r);
}

/// r + x computed without cancellation; f^2 in the identity regime.
template <class Real>
Real r_plus_x(Real x, std::span<const Real> y) {
  const Real y2 = norm_squared(y);
  const Real r = std::sqrt(x * x + y2);
  return x >= Real(0) ? r + x : y2 / (r - x);
}

}  // namespace stark::parabolic
