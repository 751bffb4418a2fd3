#pragma once

// Transport symbols along the free flow Theta(t):
//   b_0 = 1,  q_0 = q,
//   b_{k+1}(p) = i int_0^{+-inf} q_k(Theta(t) p) dt,
//   q_{k+1}    = q b_{k+1} - (1/2) Laplacian_{(x,y)} b_{k+1},
// so that i (d_eta + (eta, zeta) . grad_{(x,y)}) b_{k+1} = q_k.

#include <complex>
#include <vector>

#include "stark/classical.hpp"
#include "stark/fit.hpp"
#include "stark/potentials.hpp"

namespace stark::transport {

using classical::PhasePoint;
using potentials::PotentialSpec;
using Complex = std::complex<double>;

struct TransportOptions {
  double m = 1.0;       ///< regularization in <y>_m
  double eps = 0.3;     ///< aperture of X+-_eps
  int k_max = 2;
  double t_max = 1e5;   ///< quadrature horizon
  double tol = 1e-10;   ///< absolute budget for quadrature plus tail error
  double rel_tol = 1e-13;
  double lap_h = 0.0;   ///< Laplacian step; 0 selects 1e-3 sqrt(1 + |x|)
};

struct SymbolValue {
  int k = 0;
  Complex value;
  PhasePoint point;
  int sign = 1;
  double error = 0.0;       ///< quadrature plus tail error (plus rel_tol |value| for k > 1)
  double tail = 0.0;        ///< magnitude of the tail beyond t_max
  double tail_error = 0.0;
};

/// Decay exponent of q along the free flow, q(Theta(t) p) ~ t^{-p}.
double flow_decay_power(const PotentialSpec& spec);

/// b_k with error bookkeeping. k = 0 returns 1. Raises DomainError outside
/// X+-_eps, ConfigError for k > k_max and BudgetError("tol") when the
/// combined error exceeds tol.
SymbolValue symbol_b_value(int k, const PhasePoint& p, const PotentialSpec& spec, int sign,
                           const TransportOptions& options = {});

Complex symbol_b(int k, const PhasePoint& p, const PotentialSpec& spec, int sign, const TransportOptions& options = {});

struct QParts {
  Complex product;    ///< q b_k
  Complex laplacian;  ///< Laplacian_{(x,y)} b_k
  Complex value() const { return product - 0.5 * laplacian; }
};

/// Both terms of q_k for k >= 1; the stencil must stay in X+-_eps.
QParts symbol_q_parts(int k, const PhasePoint& p, const PotentialSpec& spec, int sign,
                      const TransportOptions& options = {});

/// q_k; k = 0 returns q(p).
Complex symbol_q(int k, const PhasePoint& p, const PotentialSpec& spec, int sign, const TransportOptions& options = {});

/// | i (d_eta + (eta, zeta) . grad) b_k - q_{k-1} | with a central difference
/// of step h_eta along (eta, zeta, 1, 0).
double transport_residual(int k, const PhasePoint& p, const PotentialSpec& spec, int sign, double h_eta,
                          const TransportOptions& options = {});

enum class Symbol { b, q };

/// Points (x, c x, sqrt(2x), zeta) for each x.
std::vector<PhasePoint> ray_points(const std::vector<double>& xs, const std::vector<double>& c,
                                   const std::vector<double>& zeta);

/// Log-log slope of |b_k| or |q_k| against x along the ray; needs at least 4 points.
LineFit decay_fit_symbols(int k, Symbol which, const PotentialSpec& spec, int sign, const std::vector<PhasePoint>& ray,
                          const TransportOptions& options = {});

}  // namespace stark::transport
