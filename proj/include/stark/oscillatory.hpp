#pragma once

// The free generalized eigenfunction
//   u(x, y) = c int dzeta xi(zeta) int e^{i theta} deta,   c = (2 pi)^{-(d+1)/2},
//   theta = y.zeta - eta^3/6 + (x + lambda - |zeta|^2/2) eta,
// its Airy reduction in eta and the two-term stationary-phase asymptote.

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "stark/fit.hpp"

namespace stark::oscillatory {

using Complex = std::complex<double>;

/// int e^{i(-eta^3/6 + a eta)} deta = 2^{1/3} 2 pi Ai(-2^{1/3} a),  a = x + lambda - |zeta|^2/2.
Complex airy_reduction(double x, std::span<const double> zeta, double lambda);

/// Smooth compactly supported amplitude xi on R^{d-1}: a finite sum of
/// C-infinity bumps  A exp(-1/(1 - |zeta - zeta0|^2/w^2))  and, for d = 2,
/// cubic interpolants of samples (zero outside the sampled interval).
class XiProfile {
 public:
  XiProfile() = default;

  static XiProfile bump(std::vector<double> center, double width, Complex amplitude = 1.0);
  /// d = 2 only; knots strictly increasing, at least 4 samples.
  static XiProfile samples(std::vector<double> knots, std::vector<Complex> values);
  /// xi = 0 on R^{dim}.
  static XiProfile zero(int dim);

  /// Dimension of the zeta variable (d - 1).
  int dim() const { return dim_; }
  Complex operator()(std::span<const double> zeta) const;
  Complex operator()(double zeta) const { return (*this)(std::span<const double>(&zeta, 1)); }

  /// Axis-aligned boxes covering the support, one per component.
  struct Box {
    std::vector<double> lo, hi;
  };
  std::vector<Box> support() const;

  XiProfile operator+(const XiProfile& other) const;
  XiProfile scaled(Complex factor) const;
  /// zeta -> conj(xi(-zeta))
  XiProfile reflected_conjugate() const;

 private:
  struct Component;
  int dim_ = 1;
  std::vector<std::shared_ptr<const Component>> parts_;
};

struct EigenfunctionOptions {
  double tol = 1e-10;   ///< absolute error target of the zeta quadrature
  int max_panels = 20000;
};

/// c int xi(zeta) e^{i y.zeta} airy_reduction(x, zeta, lambda) dzeta; d = y.size() + 1 in {2, 3}.
/// BudgetError("tol") when the quadrature does not reach tol.
Complex free_eigenfunction(double x, std::span<const double> y, const XiProfile& xi, double lambda,
                           const EigenfunctionOptions& options = {});

/// (2 pi)^{-1/2} (2X)^{-d/4} sum_{+-} e^{-+i pi d/4} e^{+-i theta1(X, y)} xi(+-omega),
/// X = x + lambda, omega = y / sqrt(2X). DomainError at or beyond the caustic.
Complex stationary_phase_eigenfunction(double x, std::span<const double> y, const XiProfile& xi, double lambda);

struct EigenfunctionSample {
  double x = 0.0;
  std::vector<double> y;
  double lambda = 0.0;
  Complex exact;
  Complex asymptotic;
  double rel_error = 0.0;  ///< |exact - asymptotic| / |exact|
};

EigenfunctionSample compare_eigenfunction(double x, std::vector<double> y, const XiProfile& xi, double lambda,
                                          const EigenfunctionOptions& options = {});

struct ConvergenceResult {
  std::vector<EigenfunctionSample> samples;
  LineFit fit;  ///< log rel_error against log x
  double exponent() const { return fit.slope; }
  /// rel_error never grows by more than `jitter` (relative) from one x to the next.
  bool monotone(double jitter = 0.1) const;
};

/// Samples at y = y_over_x * x * e_1 for each x (increasing) and fits the decay of rel_error.
ConvergenceResult asymptotic_convergence(double y_over_x, const std::vector<double>& x_list, const XiProfile& xi,
                                         double lambda, const EigenfunctionOptions& options = {});

}  // namespace stark::oscillatory
