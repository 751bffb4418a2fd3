#include "stark/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "stark/error.hpp"
#include "stark/parallel.hpp"
#include "stark/quadrature.hpp"

namespace stark::transport {

namespace {

using potentials::PotentialKind;

constexpr Complex kI{0.0, 1.0};

struct Context {
  const PotentialSpec& spec;
  int sign;
  const TransportOptions& opt;
  double p0;  // flow decay power of q
};

double potential_at(const PotentialSpec& spec, const PhasePoint& p) {
  double buf[16];
  std::vector<double> heap;
  double* pos = buf;
  const std::size_t n = p.y.size() + 1;
  if (n > 16) {
    heap.resize(n);
    pos = heap.data();
  }
  pos[0] = p.x;
  for (std::size_t i = 0; i + 1 < n; ++i) pos[i + 1] = p.y[i];
  return potentials::eval_potential<double>(spec, std::span<const double>(pos, n));
}

double laplacian_step(const PhasePoint& p, const TransportOptions& opt) {
  return opt.lap_h > 0 ? opt.lap_h : 1e-3 * std::sqrt(1.0 + std::abs(p.x));
}

// Far along the flow b varies on the length scale x, so nested stencils use a
// step proportional to x; the sqrt(x) step would let rounding dominate there.
double nested_laplacian_step(const PhasePoint& p) { return 1e-3 * (1.0 + std::abs(p.x)); }

PhasePoint shifted(const PhasePoint& p, std::size_t axis, double h) {
  PhasePoint s = p;
  if (axis == 0)
    s.x += h;
  else
    s.y[axis - 1] += h;
  return s;
}

// Quadrature panels (in the compressed variable) and map scale of one b_k
// evaluation, reused across a finite-difference stencil.
struct Rule {
  double scale = 0.0;
  double horizon = 0.0;
  std::vector<double> breaks;
};

using LComplex = std::complex<long double>;

struct BIntegral {
  quadrature::TailResult<Complex> result;
  LComplex precise;  ///< result.value before rounding to double
  Rule rule;
};

// Stencil offset h along one position axis. First-order symbols apply it in
// long double so second differences of b_1 are not swamped by rounding.
struct Shift {
  std::size_t axis = 0;
  long double h = 0;
};

// Nested evaluations (at points Theta(t) p inside an outer integrand) extend
// the horizon to 1e3 map scales so the tail expansion stays valid far out.
BIntegral b_integral(int k, const PhasePoint& p, const Context& ctx, bool nested, const Rule* frozen = nullptr,
                     const Shift& shift = {});

LComplex b_raw(int k, const PhasePoint& p, const Context& ctx, const Rule* frozen, const Shift& shift) {
  if (k == 0) return 1.0L;
  if (ctx.spec.kind == PotentialKind::zero) return 0.0L;
  return b_integral(k, p, ctx, true, frozen, shift).precise;
}

// Richardson-refined central second differences in (x, y). The stencil
// reuses the quadrature rule of the center evaluation.
Complex laplacian_raw(int k, const PhasePoint& p, const Context& ctx, LComplex center, const Rule& rule,
                      bool nested) {
  if (ctx.spec.kind == PotentialKind::zero) return 0.0;
  const long double h = nested ? nested_laplacian_step(p) : laplacian_step(p, ctx.opt);
  const std::size_t n = p.y.size() + 1;
  LComplex coarse = 0.0L, fine = 0.0L;
  auto at = [&](std::size_t axis, long double sh) { return b_raw(k, p, ctx, &rule, Shift{axis, sh}); };
  for (std::size_t axis = 0; axis < n; ++axis) {
    coarse += at(axis, h) + at(axis, -h) - 2.0L * center;
    fine += at(axis, h / 2) + at(axis, -h / 2) - 2.0L * center;
  }
  coarse /= h * h;
  fine /= h * h / 4;
  const LComplex lap = (4.0L * fine - coarse) / 3.0L;
  return {static_cast<double>(lap.real()), static_cast<double>(lap.imag())};
}

QParts q_parts_raw(int k, const PhasePoint& p, const Context& ctx) {
  if (ctx.spec.kind == PotentialKind::zero) return {};
  const double q = potential_at(ctx.spec, p);
  const auto center = b_integral(k, p, ctx, true);
  return {q * center.result.value, laplacian_raw(k, p, ctx, center.precise, center.rule, true)};
}

Complex q_raw(int k, const PhasePoint& p, const Context& ctx) {
  if (k == 0) return potential_at(ctx.spec, p);
  return q_parts_raw(k, p, ctx).value();
}

double compression_scale(const PhasePoint& p, double m) {
  return std::sqrt(2.0 * (std::abs(p.x) + classical::japanese(p.y, m))) + std::abs(p.eta);
}

BIntegral b_integral(int k, const PhasePoint& p, const Context& ctx, bool nested, const Rule* frozen,
                     const Shift& shift) {
  const double s = ctx.sign >= 0 ? 1.0 : -1.0;
  quadrature::TailOptions topt;
  // Nested values feed second differences and can be far below tol, so they
  // are resolved to relative accuracy only.
  topt.quad.abs_tol = nested ? 0.0 : 1e-3 * ctx.opt.tol;
  topt.quad.rel_tol = ctx.opt.rel_tol;
  if (frozen) {
    topt.scale = frozen->scale;
    topt.horizon = frozen->horizon;
    topt.breaks = &frozen->breaks;
  } else {
    topt.scale = compression_scale(p, ctx.opt.m);
    topt.horizon = nested ? std::max(ctx.opt.t_max, 1e3 * topt.scale) : ctx.opt.t_max;
  }
  topt.decay_power = k * (ctx.p0 - 1.0) + 1.0;
  quadrature::TailResult<Complex> r;
  LComplex precise;
  if (k == 1) {
    // q along the flow in long double, without materializing phase points
    const std::size_t n = p.y.size() + 1;
    std::vector<long double> base(n), pos(n);
    base[0] = p.x;
    for (std::size_t i = 1; i < n; ++i) base[i] = p.y[i - 1];
    base[shift.axis] += shift.h;
    auto integrand = [&](double t) -> long double {
      const long double st = s * static_cast<long double>(t);
      pos[0] = base[0] + st * p.eta + st * st / 2;
      for (std::size_t i = 1; i < n; ++i) pos[i] = base[i] + st * p.zeta[i - 1];
      return potentials::eval_potential<long double>(ctx.spec, pos);
    };
    auto real = quadrature::integrate_to_infinity(integrand, 0.0, topt);
    precise = LComplex(0.0L, s * real.value);
    r.value = static_cast<double>(real.value);
    r.quad_error = real.quad_error;
    r.tail = real.tail;
    r.tail_error = real.tail_error;
    r.converged = real.converged;
    r.breaks = std::move(real.breaks);
  } else {
    const PhasePoint origin = shift.h != 0 ? shifted(p, shift.axis, static_cast<double>(shift.h)) : p;
    auto integrand = [&](double t) -> Complex { return q_raw(k - 1, classical::free_flow(origin, s * t), ctx); };
    r = quadrature::integrate_to_infinity(integrand, 0.0, topt);
  }
  // b_k = i int_0^{s inf} q_{k-1}(Theta(t) p) dt
  r.value *= s * kI;
  if (k != 1) precise = LComplex(r.value.real(), r.value.imag());
  Rule rule{topt.scale, topt.horizon, std::move(r.breaks)};
  return {std::move(r), precise, std::move(rule)};
}

void check_options(const TransportOptions& opt, const char* op) {
  if (!(opt.m > 0) || !(opt.eps > 0 && opt.eps < 1) || opt.k_max < 0 || !(opt.t_max > 0) || !(opt.tol > 0) ||
      !(opt.rel_tol >= 0) || !(opt.lap_h >= 0))
    throw ConfigError("transport", op, "invalid transport options");
}

void check_order(int k, const TransportOptions& opt, const char* op, int lowest) {
  if (k < lowest) throw DomainError("transport", op, "order k must be >= " + std::to_string(lowest));
  if (k > opt.k_max)
    throw ConfigError("transport", op,
                      "order k = " + std::to_string(k) + " exceeds k_max = " + std::to_string(opt.k_max));
}

void check_domain(const PhasePoint& p, const PotentialSpec& spec, int sign, const TransportOptions& opt,
                  const char* op, const char* what = "point") {
  classical::check_point(p, op);
  potentials::validate(spec, p.dim());
  if (sign != 1 && sign != -1) throw ConfigError("transport", op, "sign must be +1 or -1");
  if (!classical::in_region_X(p, opt.m, opt.eps, sign))
    throw DomainError("transport", op, std::string(what) + " outside X" + (sign > 0 ? "+" : "-") + "_eps");
}

void check_laplacian_stencil(const PhasePoint& p, int sign, const TransportOptions& opt, const char* op) {
  const double h = laplacian_step(p, opt);
  for (std::size_t axis = 0; axis <= p.y.size(); ++axis)
    for (double sh : {h, -h})
      if (!classical::in_region_X(shifted(p, axis, sh), opt.m, opt.eps, sign))
        throw DomainError("transport", op, "Laplacian stencil leaves X_eps");
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

double flow_decay_power(const PotentialSpec& spec) {
  switch (spec.kind) {
    case PotentialKind::coulomb:
    case PotentialKind::homogeneous:
      return 2.0 * spec.alpha;
    case PotentialKind::table:
      return 1.0 + 2.0 * spec.delta;
    case PotentialKind::zero:
      break;
  }
  return 2.0;
}

SymbolValue symbol_b_value(int k, const PhasePoint& p, const PotentialSpec& spec, int sign,
                           const TransportOptions& options) {
  check_options(options, "symbol_b");
  check_order(k, options, "symbol_b", 0);
  check_domain(p, spec, sign, options, "symbol_b");
  SymbolValue out;
  out.k = k;
  out.point = p;
  out.sign = sign;
  if (k == 0) {
    out.value = 1.0;
    return out;
  }
  if (spec.kind == PotentialKind::zero) {
    out.value = 0.0;
    return out;
  }
  const Context ctx{spec, sign, options, flow_decay_power(spec)};
  const auto r = b_integral(k, p, ctx, false).result;
  out.value = r.value;
  // nested symbols are resolved to rel_tol, which bounds what they pass on
  out.error = r.error() + (k > 1 ? options.rel_tol * std::abs(r.value) : 0.0);
  out.tail = r.tail;
  out.tail_error = r.tail_error;
  if (!(out.error <= options.tol))
    throw BudgetError("transport", "symbol_b", "tail_tolerance",
                      "quadrature plus tail error " + short_number(out.error) + " exceeds tol " +
                          short_number(options.tol) + " at t_max = " + short_number(options.t_max));
  return out;
}

Complex symbol_b(int k, const PhasePoint& p, const PotentialSpec& spec, int sign, const TransportOptions& options) {
  return symbol_b_value(k, p, spec, sign, options).value;
}

QParts symbol_q_parts(int k, const PhasePoint& p, const PotentialSpec& spec, int sign,
                      const TransportOptions& options) {
  check_options(options, "symbol_q");
  check_order(k, options, "symbol_q", 1);
  check_domain(p, spec, sign, options, "symbol_q");
  check_laplacian_stencil(p, sign, options, "symbol_q");
  if (spec.kind == PotentialKind::zero) return {};
  const Context ctx{spec, sign, options, flow_decay_power(spec)};
  const auto center = b_integral(k, p, ctx, false);
  if (!(center.result.error() <= options.tol))
    throw BudgetError("transport", "symbol_q", "tail_tolerance", "b_k error exceeds tol at t_max");
  const double q = potential_at(spec, p);
  return {q * center.result.value, laplacian_raw(k, p, ctx, center.precise, center.rule, false)};
}

Complex symbol_q(int k, const PhasePoint& p, const PotentialSpec& spec, int sign, const TransportOptions& options) {
  if (k == 0) {
    check_domain(p, spec, sign, options, "symbol_q");
    return potential_at(spec, p);
  }
  return symbol_q_parts(k, p, spec, sign, options).value();
}

double transport_residual(int k, const PhasePoint& p, const PotentialSpec& spec, int sign, double h_eta,
                          const TransportOptions& options) {
  check_options(options, "transport_residual");
  check_order(k, options, "transport_residual", 1);
  if (!(h_eta > 0)) throw ConfigError("transport", "transport_residual", "h_eta must be positive");
  check_domain(p, spec, sign, options, "transport_residual");
  // p + h v with v = (eta, zeta, 1, 0), the generator of the free flow
  auto along = [&](double h) {
    PhasePoint s = p;
    s.x += h * p.eta;
    for (std::size_t i = 0; i < s.y.size(); ++i) s.y[i] += h * p.zeta[i];
    s.eta += h;
    return s;
  };
  const PhasePoint plus = along(h_eta), minus = along(-h_eta);
  check_domain(plus, spec, sign, options, "transport_residual", "stencil point");
  check_domain(minus, spec, sign, options, "transport_residual", "stencil point");
  const Complex derivative =
      (symbol_b(k, plus, spec, sign, options) - symbol_b(k, minus, spec, sign, options)) / (2.0 * h_eta);
  const Complex source = symbol_q(k - 1, p, spec, sign, options);
  return std::abs(kI * derivative - source);
}

std::vector<PhasePoint> ray_points(const std::vector<double>& xs, const std::vector<double>& c,
                                   const std::vector<double>& zeta) {
  if (c.empty() || c.size() != zeta.size())
    throw ConfigError("transport", "ray_points", "c and zeta must have the same length d - 1 >= 1");
  std::vector<PhasePoint> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (!(x > 0)) throw DomainError("transport", "ray_points", "ray abscissae must be positive");
    PhasePoint p;
    p.x = x;
    for (double ci : c) p.y.push_back(ci * x);
    p.eta = std::sqrt(2.0 * x);
    p.zeta = zeta;
    out.push_back(std::move(p));
  }
  return out;
}

LineFit decay_fit_symbols(int k, Symbol which, const PotentialSpec& spec, int sign, const std::vector<PhasePoint>& ray,
                          const TransportOptions& options) {
  if (ray.size() < 4) throw DomainError("transport", "decay_fit_symbols", "need at least 4 ray samples");
  const auto magnitudes = parallel_map(ray.size(), default_workers(), [&](std::size_t i) {
    return std::abs(which == Symbol::b ? symbol_b(k, ray[i], spec, sign, options)
                                       : symbol_q(k, ray[i], spec, sign, options));
  });
  std::vector<double> xs;
  for (const auto& p : ray) xs.push_back(p.x);
  return fit_power_law(xs, magnitudes);
}

}  // namespace stark::transport
