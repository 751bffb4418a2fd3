#pragma once

// Adaptive Gauss-Kronrod (G10/K21) quadrature with global error-driven
// bisection, plus a semi-infinite driver with a fitted power-law tail.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <type_traits>
#include <vector>

namespace stark::quadrature {

namespace detail {

// QUADPACK dqk21 abscissae (positive half, descending) and weights.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod abscissae 1,3,5,7,9.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(long double v) { return static_cast<double>(std::abs(v)); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template <class T>
struct Panel {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class T, class F>
Panel<T> kronrod21(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kWgk[10];
  T gauss{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += sum * kWgk[j];
    if (j % 2 == 1) gauss += sum * kWg[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, magnitude(kronrod - gauss)};
}

}  // namespace detail

struct Options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  int max_panels = 4000;
};

template <class T>
struct Result {
  T value{};
  double error = 0.0;
  int panels = 0;
  bool converged = false;
  std::vector<double> breaks;  ///< final panel endpoints, ascending
};

/// Integrates f over [a, b]. T is double, long double or std::complex<double>.
template <class F>
auto integrate(F&& f, double a, double b, const Options& opt = {}) {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  Result<T> out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Panel<T>> heap;
  heap.push(detail::kronrod21<T>(f, a, b));
  T total = heap.top().value;
  double error = heap.top().error;
  int panels = 1;
  auto done = [&] {
    return error <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total));
  };
  while (!done() && panels < opt.max_panels) {
    auto worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
    heap.pop();
    auto left = detail::kronrod21<T>(f, worst.a, mid);
    auto right = detail::kronrod21<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to shed the drift accumulated by incremental updates.
  T sum{};
  double err = 0.0;
  out.breaks.push_back(b);
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    out.breaks.push_back(heap.top().a);
    heap.pop();
  }
  std::sort(out.breaks.begin(), out.breaks.end());
  out.value = sum;
  out.error = err;
  out.panels = panels;
  out.converged = err <= std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(sum));
  return out;
}

/// Applies the K21 rule on the given panels without refinement. Reusing the
/// panels of a nearby adaptive run makes the result a smooth function of any
/// parameter of f, which keeps finite differences free of refinement jumps.
template <class F>
auto integrate_fixed(F&& f, const std::vector<double>& breaks) {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  Result<T> out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const auto panel = detail::kronrod21<T>(f, breaks[i], breaks[i + 1]);
    out.value += panel.value;
    out.error += panel.error;
  }
  out.panels = breaks.size() > 1 ? static_cast<int>(breaks.size() - 1) : 0;
  out.converged = true;
  out.breaks = breaks;
  return out;
}

template <class T>
struct TailResult {
  T value{};          ///< integral over [origin, origin + horizon] plus tail
  double quad_error = 0.0;
  double tail = 0.0;  ///< magnitude of the analytic tail beyond the horizon
  double tail_error = 0.0;
  bool converged = false;
  std::vector<double> breaks;  ///< panels of the mapped finite part
  double error() const { return quad_error + tail_error; }
};

struct TailOptions {
  Options quad{};
  double horizon = 1e5;     ///< integrate numerically on [origin, origin + horizon]
  double scale = 1.0;       ///< compression scale of the s/(1-s) map
  double decay_power = 2.0; ///< f(t) ~ (t - origin)^(-decay_power) beyond horizon, corrections in 1/t
  const std::vector<double>* breaks = nullptr;  ///< reuse these mapped panels instead of adapting
};

/// Integrates f over [origin, inf). The finite part uses the compressing map
/// t = origin + scale*s/(1-s) up to origin + horizon. Beyond the horizon f is
/// modelled as u^{-p} (A + B/u + C/u^2), u = t - origin, fitted through the
/// samples at horizon, horizon/2 and horizon/4, and integrated in closed form.
/// The tail error is the change against the same fit through horizon/2,
/// horizon/4 and horizon/8, an overestimate by about 2^3.
template <class F>
auto integrate_to_infinity(F&& f, double origin, const TailOptions& opt) {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  TailResult<T> out;
  const double horizon = opt.horizon;
  const double scale = opt.scale;
  auto mapped = [&](double s) -> T {
    const double one_minus = 1.0 - s;
    const double t = origin + scale * s / one_minus;
    return f(t) * (scale / (one_minus * one_minus));
  };
  const double s_max = horizon / (scale + horizon);
  auto body = opt.breaks ? integrate_fixed(mapped, *opt.breaks) : integrate(mapped, 0.0, s_max, opt.quad);
  out.value = body.value;
  out.quad_error = body.error;
  out.converged = body.converged;
  out.breaks = std::move(body.breaks);

  const double p = opt.decay_power;
  if (!(p > 1.0)) {
    out.tail = INFINITY;
    out.tail_error = INFINITY;
    return out;
  }
  const double u[4] = {horizon, 0.5 * horizon, 0.25 * horizon, 0.125 * horizon};
  T g[4];
  for (int i = 0; i < 4; ++i) g[i] = f(origin + u[i]) * std::pow(u[i] / horizon, p);
  // g(w) = A + B w + C w^2 through w = 1, 2, 4
  const T C = (g[2] - 3.0 * g[1] + 2.0 * g[0]) / 6.0;
  const T B = g[1] - g[0] - 3.0 * C;
  const T A = g[0] - B - C;
  // int_H^inf (H/u)^{p+j} du = H / (p + j - 1)
  const T three = horizon * (A / (p - 1.0) + B / p + C / (p + 1.0));
  // same model through w = 2, 4, 8: its truncation error is larger by 2^3
  const T d24 = (g[2] - g[1]) / 2.0;
  const T d48 = (g[3] - g[2]) / 4.0;
  const T Cc = (d48 - d24) / 6.0;
  const T Bc = d24 - 6.0 * Cc;
  const T Ac = g[1] - 2.0 * Bc - 4.0 * Cc;
  const T coarse = horizon * (Ac / (p - 1.0) + Bc / p + Cc / (p + 1.0));
  out.value += three;
  out.tail = detail::magnitude(three);
  out.tail_error = detail::magnitude(three - coarse);
  return out;
}

}  // namespace stark::quadrature
