#include "stark/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stark/error.hpp"
#include "stark/parabolic.hpp"
#include "stark/parallel.hpp"
#include "stark/quadrature.hpp"
#include "stark/special.hpp"
#include "stark/spline.hpp"

namespace stark::oscillatory {

namespace {

constexpr double kPi = std::numbers::pi;
const double kCbrt2 = std::cbrt(2.0);

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

Complex airy_reduction(double x, std::span<const double> zeta, double lambda) {
  const double a = x + lambda - 0.5 * dot(zeta, zeta);
  return kCbrt2 * 2 * kPi * special::airy_ai(-kCbrt2 * a);
}

struct XiProfile::Component {
  bool sampled = false;
  Complex amplitude = 1.0;
  // bump
  std::vector<double> center;
  double width = 1.0;
  // samples on [lo, hi], evaluated at -t when mirrored and conjugated on request
  CubicSpline<Complex> spline;
  double lo = 0.0, hi = 0.0;
  bool mirrored = false;
  bool conjugated = false;

  Complex eval(std::span<const double> z) const {
    if (sampled) {
      const double t = mirrored ? -z[0] : z[0];
      if (!(t >= lo && t <= hi)) return 0.0;
      const Complex v = spline(t);
      return amplitude * (conjugated ? std::conj(v) : v);
    }
    double r2 = 0;
    for (std::size_t i = 0; i < center.size(); ++i) r2 += (z[i] - center[i]) * (z[i] - center[i]);
    const double rho2 = r2 / (width * width);
    if (!(rho2 < 1.0)) return 0.0;
    return amplitude * std::exp(-1.0 / (1.0 - rho2));
  }
};

XiProfile XiProfile::bump(std::vector<double> center, double width, Complex amplitude) {
  if (center.empty()) throw ConfigError("oscillatory", "xi_bump", "center must have d - 1 >= 1 components");
  if (!(width > 0) || !std::isfinite(width)) throw ConfigError("oscillatory", "xi_bump", "width must be positive");
  for (double c : center)
    if (!std::isfinite(c)) throw ConfigError("oscillatory", "xi_bump", "center must be finite");
  auto c = std::make_shared<Component>();
  c->center = std::move(center);
  c->width = width;
  c->amplitude = amplitude;
  XiProfile out;
  out.dim_ = static_cast<int>(c->center.size());
  out.parts_.push_back(std::move(c));
  return out;
}

XiProfile XiProfile::samples(std::vector<double> knots, std::vector<Complex> values) {
  if (knots.size() < 4 || knots.size() != values.size())
    throw ConfigError("oscillatory", "xi_samples", "need at least 4 knots with matching values");
  for (std::size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1])) throw ConfigError("oscillatory", "xi_samples", "knots must increase strictly");
  auto c = std::make_shared<Component>();
  c->sampled = true;
  c->lo = knots.front();
  c->hi = knots.back();
  c->spline = CubicSpline<Complex>(std::move(knots), std::move(values));
  XiProfile out;
  out.dim_ = 1;
  out.parts_.push_back(std::move(c));
  return out;
}

XiProfile XiProfile::zero(int dim) {
  if (dim < 1) throw ConfigError("oscillatory", "xi_zero", "dimension must be >= 1");
  XiProfile out;
  out.dim_ = dim;
  return out;
}

Complex XiProfile::operator()(std::span<const double> zeta) const {
  if (static_cast<int>(zeta.size()) != dim_)
    throw DomainError("oscillatory", "xi", "zeta has the wrong dimension");
  Complex sum = 0.0;
  for (const auto& p : parts_) sum += p->eval(zeta);
  return sum;
}

std::vector<XiProfile::Box> XiProfile::support() const {
  std::vector<Box> out;
  for (const auto& p : parts_) {
    Box b;
    if (p->sampled) {
      b.lo = {p->mirrored ? -p->hi : p->lo};
      b.hi = {p->mirrored ? -p->lo : p->hi};
    } else {
      for (double c : p->center) {
        b.lo.push_back(c - p->width);
        b.hi.push_back(c + p->width);
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

XiProfile XiProfile::operator+(const XiProfile& other) const {
  if (other.dim_ != dim_) throw ConfigError("oscillatory", "xi_sum", "profiles differ in dimension");
  XiProfile out = *this;
  out.parts_.insert(out.parts_.end(), other.parts_.begin(), other.parts_.end());
  return out;
}

XiProfile XiProfile::scaled(Complex factor) const {
  XiProfile out;
  out.dim_ = dim_;
  for (const auto& p : parts_) {
    auto c = std::make_shared<Component>(*p);
    c->amplitude *= factor;
    out.parts_.push_back(std::move(c));
  }
  return out;
}

XiProfile XiProfile::reflected_conjugate() const {
  XiProfile out;
  out.dim_ = dim_;
  for (const auto& p : parts_) {
    auto c = std::make_shared<Component>(*p);
    c->amplitude = std::conj(p->amplitude);
    if (c->sampled) {
      c->mirrored = !p->mirrored;
      c->conjugated = !p->conjugated;
    } else {
      for (double& v : c->center) v = -v;
    }
    out.parts_.push_back(std::move(c));
  }
  return out;
}

namespace {

using Box = XiProfile::Box;

// Consecutive intervals between box edges along `axis` that some box covers.
// `fixed` restricts to boxes containing the already chosen outer coordinate.
std::vector<std::pair<double, double>> segments(const std::vector<Box>& boxes, std::size_t axis,
                                                const double* fixed = nullptr) {
  std::vector<const Box*> active;
  for (const auto& b : boxes)
    if (!fixed || (*fixed >= b.lo[0] && *fixed <= b.hi[0])) active.push_back(&b);
  std::vector<double> edges;
  for (const Box* b : active) {
    edges.push_back(b->lo[axis]);
    edges.push_back(b->hi[axis]);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    for (const Box* b : active)
      if (mid > b->lo[axis] && mid < b->hi[axis]) {
        out.emplace_back(edges[i], edges[i + 1]);
        break;
      }
  }
  return out;
}

template <class F>
Complex integrate_segments(F&& f, const std::vector<std::pair<double, double>>& segs, double tol, int max_panels,
                           bool& converged) {
  Complex sum = 0.0;
  for (const auto& [a, b] : segs) {
    quadrature::Options opt;
    opt.abs_tol = tol / static_cast<double>(segs.size());
    opt.rel_tol = 0.0;
    opt.max_panels = max_panels;
    const auto r = quadrature::integrate(f, a, b, opt);
    sum += r.value;
    converged = converged && r.converged;
  }
  return sum;
}

}  // namespace

Complex free_eigenfunction(double x, std::span<const double> y, const XiProfile& xi, double lambda,
                           const EigenfunctionOptions& options) {
  const int d = static_cast<int>(y.size()) + 1;
  if (d != 2 && d != 3) throw ConfigError("oscillatory", "free_eigenfunction", "d must be 2 or 3");
  if (xi.dim() != d - 1) throw ConfigError("oscillatory", "free_eigenfunction", "xi dimension must be d - 1");
  if (!(options.tol > 0) || options.max_panels < 1)
    throw ConfigError("oscillatory", "free_eigenfunction", "tol and max_panels must be positive");
  if (!std::isfinite(x) || !std::isfinite(lambda))
    throw DomainError("oscillatory", "free_eigenfunction", "non-finite x or lambda");
  const double c = std::pow(2 * kPi, -0.5 * (d + 1));
  const auto boxes = xi.support();
  bool converged = true;
  Complex value = 0.0;
  if (d == 2) {
    auto f = [&](double z) {
      const double zeta[1] = {z};
      return xi(zeta) * std::polar(1.0, y[0] * z) * airy_reduction(x, zeta, lambda);
    };
    value = integrate_segments(f, segments(boxes, 0), options.tol / c, options.max_panels, converged);
  } else {
    const auto outer = segments(boxes, 0);
    double outer_length = 0;
    for (const auto& [a, b] : outer) outer_length += b - a;
    const double inner_tol = 0.5 * options.tol / c / std::max(outer_length, 1.0);
    auto g = [&](double z0) {
      auto f = [&](double z1) {
        const double zeta[2] = {z0, z1};
        return xi(zeta) * std::polar(1.0, y[0] * z0 + y[1] * z1) * airy_reduction(x, zeta, lambda);
      };
      return integrate_segments(f, segments(boxes, 1, &z0), inner_tol, options.max_panels, converged);
    };
    value = integrate_segments(g, outer, 0.5 * options.tol / c, options.max_panels, converged);
  }
  if (!converged)
    throw BudgetError("oscillatory", "free_eigenfunction", "tol", "zeta quadrature did not reach tol");
  return c * value;
}

Complex stationary_phase_eigenfunction(double x, std::span<const double> y, const XiProfile& xi, double lambda) {
  const int d = static_cast<int>(y.size()) + 1;
  if (xi.dim() != d - 1) throw ConfigError("oscillatory", "stationary_phase_eigenfunction", "xi dimension must be d - 1");
  const double X = x + lambda;
  const double y2 = dot(y, y);
  if (!(X > 0) || !(X * X - y2 > 1e-12 * X * X))
    throw DomainError("oscillatory", "stationary_phase_eigenfunction", "x + lambda must exceed |y| (caustic margin)");
  const double theta1 = parabolic::theta1_calculus(X, y).value;
  std::vector<double> omega(y.begin(), y.end());
  for (double& w : omega) w /= std::sqrt(2 * X);
  std::vector<double> minus_omega = omega;
  for (double& w : minus_omega) w = -w;
  const double amplitude = std::pow(2 * X, -0.25 * d) / std::sqrt(2 * kPi);
  const double quarter = 0.25 * kPi * d;
  return amplitude * (std::polar(1.0, theta1 - quarter) * xi(omega) + std::polar(1.0, quarter - theta1) * xi(minus_omega));
}

EigenfunctionSample compare_eigenfunction(double x, std::vector<double> y, const XiProfile& xi, double lambda,
                                          const EigenfunctionOptions& options) {
  EigenfunctionSample s;
  s.x = x;
  s.lambda = lambda;
  s.exact = free_eigenfunction(x, y, xi, lambda, options);
  s.asymptotic = stationary_phase_eigenfunction(x, y, xi, lambda);
  const double diff = std::abs(s.exact - s.asymptotic);
  s.rel_error = std::abs(s.exact) > 0 ? diff / std::abs(s.exact) : (diff == 0 ? 0.0 : INFINITY);
  s.y = std::move(y);
  return s;
}

bool ConvergenceResult::monotone(double jitter) const {
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].rel_error > (1 + jitter) * samples[i - 1].rel_error) return false;
  return true;
}

ConvergenceResult asymptotic_convergence(double y_over_x, const std::vector<double>& x_list, const XiProfile& xi,
                                         double lambda, const EigenfunctionOptions& options) {
  if (x_list.size() < 2) throw DomainError("oscillatory", "asymptotic_convergence", "need at least two x values");
  for (std::size_t i = 1; i < x_list.size(); ++i)
    if (!(x_list[i] > x_list[i - 1]))
      throw ConfigError("oscillatory", "asymptotic_convergence", "x values must increase");
  ConvergenceResult out;
  out.samples = parallel_map(x_list.size(), default_workers(), [&](std::size_t i) {
    std::vector<double> y(static_cast<std::size_t>(xi.dim()), 0.0);
    y[0] = y_over_x * x_list[i];
    return compare_eigenfunction(x_list[i], y, xi, lambda, options);
  });
  std::vector<double> xs, errs;
  for (const auto& s : out.samples) {
    xs.push_back(s.x);
    errs.push_back(s.rel_error);
  }
  try {
    out.fit = fit_power_law(xs, errs);
  } catch (const DomainError&) {
    throw DomainError("oscillatory", "asymptotic_convergence", "degenerate relative errors, nothing to fit");
  }
  return out;
}

}  // namespace stark::oscillatory
