#pragma once

// Born principal symbol of T(lambda) = S(lambda) - I,
//   t(zeta, y) = -2i int_R^inf q(x, -y) / sqrt(2x + 2 lambda - zeta^2) dx,
// its large-|y| law for homogeneous potentials, and the diagonal singularity
// of the kernel T(zeta, zeta') = (2 pi)^{1-d} int e^{i(zeta - zeta').y} t(zeta, -y) dy.

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "stark/potentials.hpp"
#include "stark/special.hpp"

namespace stark::kernel {

using Complex = std::complex<double>;
using potentials::PotentialSpec;
using special::KernelLaw;

/// max(2, |zeta|^2 - 2 lambda + 2).
double default_cutoff(std::span<const double> zeta, double lambda);

struct BornValue {
  Complex value;
  double cutoff = 0.0;      ///< R actually used
  double error = 0.0;       ///< quadrature plus tail error
  double tail = 0.0;        ///< magnitude of the fitted tail beyond the horizon
  double truncation = 0.0;  ///< |2 int_0^R q(x, -y) / sqrt(2x) dx|, the part cut off by R
};

/// R <= 0 selects default_cutoff. ConfigError unless R >= max(1, (|zeta|^2 - 2 lambda)/2 + 1),
/// BudgetError("tail_tolerance") when the error exceeds tol.
BornValue born_symbol_value(const PotentialSpec& spec, std::span<const double> zeta, std::span<const double> y,
                            double lambda, double R = 0.0, double tol = 1e-10);

Complex born_symbol(const PotentialSpec& spec, std::span<const double> zeta, std::span<const double> y, double lambda,
                    double R = 0.0, double tol = 1e-10);

/// -2i kappa c1(alpha) |y|^{1/2 - alpha}; d = y.size() + 1 and 1/2 < alpha < d - 1/2.
Complex homogeneous_symbol_asymptote(double kappa, double alpha, std::span<const double> y);

/// {kappa c2(d, alpha), 1/2 + alpha - d}.
KernelLaw kernel_singularity_law(int d, double alpha, double kappa);

/// Values on the regular grid y_j = -L + j Delta (j = 0..nodes-1 per axis),
/// Delta = 2L / nodes, stored row-major with the last axis fastest.
struct SymbolGrid {
  int dim = 2;  ///< d - 1
  std::size_t nodes = 0;
  double extent = 0.0;  ///< L
  std::vector<double> zeta;
  double lambda = 0.0;
  std::vector<Complex> values;

  double spacing() const { return 2.0 * extent / static_cast<double>(nodes); }
  std::size_t size() const;
  double coordinate(std::size_t j) const { return -extent + static_cast<double>(j) * spacing(); }
};

struct GridOptions {
  std::size_t nodes = 2048;  ///< per axis, even
  double extent = 5e4;       ///< L
  int radial_knots = 600;    ///< samples of the radial profile on [0, sqrt(dim) L]
};

/// Fills a grid from a radial profile f(|y|) evaluated on geometric knots and
/// interpolated by a cubic spline.
SymbolGrid radial_grid(int dim, const std::function<Complex(double)>& profile, std::vector<double> zeta,
                       double lambda, const GridOptions& options = {});

/// born_symbol on the grid. The potentials are radial, so t depends on |y| only
/// and is sampled once per radial knot.
SymbolGrid born_symbol_grid(const PotentialSpec& spec, int d, std::vector<double> zeta, double lambda,
                            const GridOptions& options = {}, double R = 0.0, double tol = 1e-10);

struct FftOptions {
  double taper = 0.2;  ///< cosine taper over the outer fraction of the radius L
  double k_lo = 0.0;   ///< 0 selects 10 pi / L
  double k_hi = 0.0;   ///< 0 selects Nyquist / 8
  int bins = 16;       ///< logarithmic radial bins on [k_lo, k_hi]
};

struct RadialBin {
  double k = 0.0;          ///< mean |zeta - zeta'| of the modes in the bin
  double magnitude = 0.0;  ///< mean |T|
  double fitted = 0.0;     ///< free power-law fit at k
  double residual = 0.0;   ///< log(magnitude / fitted)
  std::size_t modes = 0;
};

struct KernelFit {
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double prefactor = 0.0;  ///< modulus, from the free fit's intercept
  double prefactor_rel_stderr = 0.0;
  /// Geometric mean of |T| k^{-law.exponent} over the bins: the modulus of the
  /// prefactor with the exponent held at the law's value.
  double prefactor_at_law_exponent = 0.0;
  double k_lo = 0.0, k_hi = 0.0;
  KernelLaw law;
  std::vector<RadialBin> bins;
};

/// Tapers the grid, applies the discrete transform normalized to
/// (2pi)^{1-d} Delta^{d-1} sum_j e^{i k.y_j} t(-y_j), bins |T| radially and fits
/// log|T| against log k. ConfigError when [k_lo, k_hi] leaves
/// [8 pi / L, Nyquist / 2] or a bin is empty.
KernelFit kernel_fft_check(const SymbolGrid& grid, const KernelLaw& law, const FftOptions& options = {});

}  // namespace stark::kernel
