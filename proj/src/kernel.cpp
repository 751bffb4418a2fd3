#include "stark/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "stark/error.hpp"
#include "stark/fit.hpp"
#include "stark/parallel.hpp"
#include "stark/quadrature.hpp"
#include "stark/spline.hpp"

namespace stark::kernel {

namespace {

constexpr double kPi = std::numbers::pi;

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// q ~ r^{-p} at infinity.
double potential_decay(const PotentialSpec& spec) {
  return spec.kind == potentials::PotentialKind::table ? 0.5 + spec.delta : spec.alpha;
}

}  // namespace

double default_cutoff(std::span<const double> zeta, double lambda) {
  return std::max(2.0, norm2(zeta) - 2 * lambda + 2);
}

BornValue born_symbol_value(const PotentialSpec& spec, std::span<const double> zeta, std::span<const double> y,
                            double lambda, double R, double tol) {
  const int d = static_cast<int>(y.size()) + 1;
  if (d < 2) throw ConfigError("kernel", "born_symbol", "y must have d - 1 >= 1 components");
  if (zeta.size() != y.size()) throw ConfigError("kernel", "born_symbol", "zeta and y must both have d - 1 components");
  if (!(tol > 0)) throw ConfigError("kernel", "born_symbol", "tol must be positive");
  for (double v : y)
    if (!std::isfinite(v)) throw DomainError("kernel", "born_symbol", "non-finite y");
  potentials::validate(spec, d);
  const double z2 = norm2(zeta);
  if (R <= 0) R = default_cutoff(zeta, lambda);
  const double floor = std::max(1.0, 0.5 * (z2 - 2 * lambda) + 1);
  if (!(R >= floor))
    throw ConfigError("kernel", "born_symbol", "R = " + short_number(R) + " must be at least " + short_number(floor));

  BornValue out;
  out.cutoff = R;
  if (spec.kind == potentials::PotentialKind::zero) return out;

  std::vector<double> point(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < y.size(); ++i) point[i + 1] = -y[i];
  auto q = [&](double x) {
    point[0] = x;
    return potentials::eval_potential(spec, point);
  };
  const double shift = 2 * lambda - z2;
  auto f = [&](double x) { return q(x) / std::sqrt(2 * x + shift); };

  quadrature::TailOptions opt;
  opt.quad.abs_tol = 0.1 * tol;
  opt.quad.rel_tol = 1e-13;
  opt.scale = std::max(std::sqrt(norm2(y)), R);
  opt.horizon = 1e6 * opt.scale;
  opt.decay_power = potential_decay(spec) + 0.5;
  const auto r = quadrature::integrate_to_infinity(f, R, opt);
  out.value = Complex(0.0, -2.0 * r.value);
  out.error = 2 * r.error();
  out.tail = 2 * r.tail;

  // x = s^2 removes the 1/sqrt(x) endpoint singularity
  try {
    quadrature::Options topt;
    topt.abs_tol = 1e-14;
    topt.rel_tol = 1e-10;
    const auto cut = quadrature::integrate([&](double s) { return q(s * s); }, 0.0, std::sqrt(R), topt);
    out.truncation = 2 * std::sqrt(2.0) * std::abs(cut.value);
  } catch (const DomainError&) {
    out.truncation = INFINITY;
  }

  if (!(out.error <= tol))
    throw BudgetError("kernel", "born_symbol", "tail_tolerance",
                      "quadrature plus tail error " + short_number(out.error) + " exceeds tol " + short_number(tol));
  return out;
}

Complex born_symbol(const PotentialSpec& spec, std::span<const double> zeta, std::span<const double> y, double lambda,
                    double R, double tol) {
  return born_symbol_value(spec, zeta, y, lambda, R, tol).value;
}

Complex homogeneous_symbol_asymptote(double kappa, double alpha, std::span<const double> y) {
  const int d = static_cast<int>(y.size()) + 1;
  if (!(alpha > 0.5 && alpha < d - 0.5))
    throw DomainError("kernel", "homogeneous_symbol_asymptote", "alpha must lie in (1/2, d - 1/2)");
  const double r = std::sqrt(norm2(y));
  if (!(r > 0) || !std::isfinite(r))
    throw DomainError("kernel", "homogeneous_symbol_asymptote", "|y| must be positive and finite");
  return Complex(0.0, -2.0 * kappa * special::c1_constant(alpha) * std::pow(r, 0.5 - alpha));
}

KernelLaw kernel_singularity_law(int d, double alpha, double kappa) {
  return {kappa * special::c2_constant(d, alpha), 0.5 + alpha - d};
}

std::size_t SymbolGrid::size() const {
  std::size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= nodes;
  return n;
}

SymbolGrid radial_grid(int dim, const std::function<Complex(double)>& profile, std::vector<double> zeta,
                       double lambda, const GridOptions& options) {
  if (dim < 1 || dim > 3) throw ConfigError("kernel", "symbol_grid", "grid dimension d - 1 must be 1, 2 or 3");
  if (options.nodes < 8 || options.nodes % 2 != 0)
    throw ConfigError("kernel", "symbol_grid", "nodes per axis must be even and at least 8");
  if (std::pow(static_cast<double>(options.nodes), dim) > 1.5e8)
    throw ConfigError("kernel", "symbol_grid", "grid too large");
  if (!(options.extent > 0) || options.radial_knots < 8)
    throw ConfigError("kernel", "symbol_grid", "extent must be positive and radial_knots at least 8");
  SymbolGrid g;
  g.dim = dim;
  g.nodes = options.nodes;
  g.extent = options.extent;
  g.zeta = std::move(zeta);
  g.lambda = lambda;

  const double r_max = std::sqrt(static_cast<double>(dim)) * g.extent * 1.001;
  const double r_min = std::min(1e-2, 0.25 * g.spacing());
  std::vector<double> knots{0.0};
  const int n = options.radial_knots - 1;
  for (int i = 0; i < n; ++i) knots.push_back(r_min * std::pow(r_max / r_min, static_cast<double>(i) / (n - 1)));
  auto values = parallel_map(knots.size(), default_workers(), [&](std::size_t i) { return profile(knots[i]); });
  const CubicSpline<Complex> spline(std::move(knots), std::move(values));

  const std::size_t N = g.nodes;
  g.values.resize(g.size());
  std::vector<double> c(N);
  for (std::size_t j = 0; j < N; ++j) c[j] = g.coordinate(j);
  if (dim == 1) {
    for (std::size_t i = 0; i < N; ++i) g.values[i] = spline(std::abs(c[i]));
  } else if (dim == 2) {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) g.values[i * N + j] = spline(std::hypot(c[i], c[j]));
  } else {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = 0; k < N; ++k)
          g.values[(i * N + j) * N + k] = spline(std::sqrt(c[i] * c[i] + c[j] * c[j] + c[k] * c[k]));
  }
  return g;
}

SymbolGrid born_symbol_grid(const PotentialSpec& spec, int d, std::vector<double> zeta, double lambda,
                            const GridOptions& options, double R, double tol) {
  if (static_cast<int>(zeta.size()) != d - 1)
    throw ConfigError("kernel", "born_symbol_grid", "zeta must have d - 1 components");
  auto profile = [&](double r) {
    std::vector<double> y(zeta.size(), 0.0);
    y[0] = r;
    return born_symbol(spec, zeta, y, lambda, R, tol);
  };
  return radial_grid(d - 1, profile, zeta, lambda, options);
}

KernelFit kernel_fft_check(const SymbolGrid& grid, const KernelLaw& law, const FftOptions& options) {
  const int dim = grid.dim;
  const std::size_t N = grid.nodes;
  if (dim < 1 || dim > 3 || N < 8 || grid.values.size() != grid.size())
    throw ConfigError("kernel", "kernel_fft_check", "malformed symbol grid");
  if (!(options.taper > 0 && options.taper < 1))
    throw ConfigError("kernel", "kernel_fft_check", "taper must lie in (0, 1)");
  if (options.bins < 3) throw ConfigError("kernel", "kernel_fft_check", "need at least 3 bins");
  const double L = grid.extent, delta = grid.spacing();
  const double nyquist = kPi / delta;
  const double band_lo = 8 * kPi / L, band_hi = 0.5 * nyquist;
  KernelFit out;
  out.law = law;
  out.k_lo = options.k_lo > 0 ? options.k_lo : 10 * kPi / L;
  out.k_hi = options.k_hi > 0 ? options.k_hi : nyquist / 8;
  if (!(out.k_lo >= band_lo * (1 - 1e-12) && out.k_hi <= band_hi * (1 + 1e-12) && out.k_lo < out.k_hi))
    throw ConfigError("kernel", "kernel_fft_check",
                      "window [" + short_number(out.k_lo) + ", " + short_number(out.k_hi) +
                          "] outside the resolvable band [" + short_number(band_lo) + ", " + short_number(band_hi) +
                          "]");

  // taper, and t(-y_j) = values at the mirrored index (N - j) mod N on each axis
  const std::size_t total = grid.size();
  fftw_complex* buf = fftw_alloc_complex(total);
  const double r0 = (1 - options.taper) * L;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat, mirrored = 0;
    double r2 = 0;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = rest % N;
      rest /= N;
    }
    for (int a = 0; a < dim; ++a) {
      const double c = grid.coordinate(idx[a]);
      r2 += c * c;
      mirrored = mirrored * N + (N - idx[a]) % N;
    }
    const double r = std::sqrt(r2);
    const double w = r <= r0 ? 1.0 : (r < L ? 0.5 * (1 + std::cos(kPi * (r - r0) / (L - r0))) : 0.0);
    const Complex v = w * grid.values[mirrored];
    buf[flat][0] = v.real();
    buf[flat][1] = v.imag();
  }
  std::vector<int> dims(static_cast<std::size_t>(dim), static_cast<int>(N));
  fftw_plan plan = fftw_plan_dft(dim, dims.data(), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double norm = std::pow(delta / (2 * kPi), dim);

  const int nb = options.bins;
  const double log_lo = std::log(out.k_lo), log_span = std::log(out.k_hi) - log_lo;
  std::vector<double> sum_k(nb, 0.0), sum_t(nb, 0.0);
  std::vector<std::size_t> count(nb, 0);
  const double dk = 2 * kPi / (static_cast<double>(N) * delta);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double k2 = 0;
    for (int a = 0; a < dim; ++a) {
      const std::size_t m = rest % N;
      rest /= N;
      const double km = dk * (m <= N / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(N));
      k2 += km * km;
    }
    const double k = std::sqrt(k2);
    if (!(k >= out.k_lo && k < out.k_hi)) continue;
    const int b = std::min(nb - 1, static_cast<int>((std::log(k) - log_lo) / log_span * nb));
    sum_k[b] += k;
    sum_t[b] += norm * std::hypot(buf[flat][0], buf[flat][1]);
    ++count[b];
  }
  fftw_free(buf);

  std::vector<double> lk, lt;
  for (int b = 0; b < nb; ++b) {
    if (count[b] == 0)
      throw ConfigError("kernel", "kernel_fft_check", "empty radial bin; widen the window or use fewer bins");
    RadialBin bin;
    bin.k = sum_k[b] / count[b];
    bin.magnitude = sum_t[b] / count[b];
    bin.modes = count[b];
    out.bins.push_back(bin);
    lk.push_back(std::log(bin.k));
    lt.push_back(std::log(bin.magnitude));
  }
  for (double v : lt)
    if (!std::isfinite(v)) throw DomainError("kernel", "kernel_fft_check", "vanishing transform in the window");
  const LineFit fit = fit_line(lk, lt);
  out.exponent = fit.slope;
  out.exponent_stderr = fit.slope_stderr;
  out.prefactor = std::exp(fit.intercept);
  out.prefactor_rel_stderr = fit.intercept_stderr;
  double pinned = 0;
  for (std::size_t i = 0; i < lk.size(); ++i) pinned += lt[i] - law.exponent * lk[i];
  out.prefactor_at_law_exponent = std::exp(pinned / static_cast<double>(lk.size()));
  for (auto& bin : out.bins) {
    bin.fitted = out.prefactor * std::pow(bin.k, out.exponent);
    bin.residual = std::log(bin.magnitude / bin.fitted);
  }
  return out;
}

}  // namespace stark::kernel
