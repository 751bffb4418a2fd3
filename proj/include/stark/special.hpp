#pragma once

#include <complex>

namespace stark::special {

/// Leading diagonal singularity of a kernel: K(z) ~ prefactor * |z|^exponent.
struct KernelLaw {
  std::complex<double> prefactor;
  double exponent = 0.0;
};

/// Gamma function for real arguments. Throws DomainError at the poles
/// x = 0, -1, -2, ... and for non-finite input.
double gamma_fn(double x);

/// Airy function Ai on the real line. Power series (extended precision) on
/// [-8, 6], asymptotic expansions outside.
double airy_ai(double u);

/// Constant of the large-|y| law  int_0^inf q(x,-y)/sqrt(2x) dx ~ kappa c1 |y|^{1/2-alpha}
/// for q = kappa r^{-alpha}:  c1 = 2^{-3/2} Gamma(1/4) Gamma(alpha/2 - 1/4) / Gamma(alpha/2).
double c1_constant(double alpha);

/// Kernel singularity constant in its fully reduced form
///   c2 = -i (2 pi)^{(1-d)/2} 2^{(d-1)/2-alpha} Gamma(1/4) Gamma(d/2-1/4-alpha/2) / Gamma(alpha/2).
/// Requires d >= 2 and 1/2 < alpha < d - 1/2.
std::complex<double> c2_constant(int d, double alpha);

/// The same constant assembled from c1 and the Fourier transform of
/// |y|^{1/2-alpha} on R^{d-1}; kept as an independent algebraic route.
std::complex<double> c2_constant_chain(int d, double alpha);

}  // namespace stark::special
