#include "stark/potentials.hpp"

#include <cmath>
#include <utility>

#include "stark/error.hpp"
#include "stark/spline.hpp"

namespace stark::potentials {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::homogeneous: return "homogeneous";
    case PotentialKind::coulomb: return "coulomb";
    case PotentialKind::table: return "table";
  }
  return "unknown";
}

PotentialKind kind_from_string(const std::string& name) {
  if (name == "zero") return PotentialKind::zero;
  if (name == "homogeneous") return PotentialKind::homogeneous;
  if (name == "coulomb") return PotentialKind::coulomb;
  if (name == "table" || name == "table-defined") return PotentialKind::table;
  throw ConfigError("potentials", "kind_from_string", "unknown potential kind '" + name + "'");
}

RadialTable::RadialTable(std::vector<double> r, std::vector<double> value)
    : r_(std::move(r)), value_(std::move(value)) {
  auto fail = [](const std::string& msg) { throw ConfigError("potentials", "RadialTable", msg); };
  if (r_.size() < 4 || r_.size() != value_.size()) fail("table needs >= 4 (r, value) samples");
  if (!(r_.front() >= 0.0)) fail("table radii must be >= 0");
  for (std::size_t i = 1; i < r_.size(); ++i)
    if (!(r_[i] > r_[i - 1])) fail("table radii must increase strictly");
  spline_ = std::make_shared<const CubicSpline<double>>(r_, value_);
}

double RadialTable::interpolate(double r) const {
  if (r <= r_.front()) return value_.front();
  return (*spline_)(r);
}

double RadialTable::derivative(double r) const {
  if (r <= r_.front()) return 0.0;
  return spline_->derivative(r);
}

PotentialSpec PotentialSpec::zero() { return {}; }

PotentialSpec PotentialSpec::coulomb(double kappa, double softening) {
  PotentialSpec s;
  s.kind = PotentialKind::coulomb;
  s.kappa = kappa;
  s.alpha = 1.0;
  s.delta = 0.5;
  s.softening = softening;
  return s;
}

PotentialSpec PotentialSpec::homogeneous(double kappa, double alpha, double softening) {
  PotentialSpec s;
  s.kind = PotentialKind::homogeneous;
  s.kappa = kappa;
  s.alpha = alpha;
  s.delta = std::min(0.5, alpha - 0.5);
  s.softening = softening;
  return s;
}

PotentialSpec PotentialSpec::tabulated(RadialTable table, double delta, double softening) {
  PotentialSpec s;
  s.kind = PotentialKind::table;
  s.kappa = 1.0;
  s.delta = delta;
  s.softening = softening;
  s.table = std::move(table);
  return s;
}

PotentialSpec PotentialSpec::unsoftened() const {
  PotentialSpec s = *this;
  s.softening = 0.0;
  return s;
}

void validate(const PotentialSpec& spec, int d) {
  auto fail = [](const std::string& msg) { throw ConfigError("potentials", "validate", msg); };
  if (d < 2) fail("dimension must be at least 2");
  if (!(spec.softening >= 0.0) || !std::isfinite(spec.softening)) fail("softening must be finite and >= 0");
  if (!(spec.exclusion_radius >= 0.0)) fail("exclusion_radius must be >= 0");
  if (!std::isfinite(spec.kappa)) fail("kappa must be finite");
  switch (spec.kind) {
    case PotentialKind::zero: return;
    case PotentialKind::coulomb:
      if (spec.alpha != 1.0 || spec.delta != 0.5) fail("coulomb requires alpha = 1 and delta = 1/2");
      return;
    case PotentialKind::homogeneous:
      if (!(spec.alpha > 0.5 && spec.alpha < d - 0.5)) fail("homogeneous alpha must lie in (1/2, d - 1/2)");
      break;
    case PotentialKind::table:
      if (spec.table.empty()) fail("table kind needs radial samples");
      break;
  }
  if (!(spec.delta > 0.0 && spec.delta <= 0.5)) fail("delta must lie in (0, 1/2]");
  if (spec.kind == PotentialKind::homogeneous && spec.alpha < 0.5 + spec.delta)
    fail("declared delta is larger than the homogeneous decay admits");
}

namespace {

template <class Real>
Real radius_squared(std::span<const Real> point) {
  Real r2 = 0;
  for (Real c : point) r2 += c * c;
  return r2;
}

template <class Real>
void check_point(const PotentialSpec& spec, std::span<const Real> point, const char* op) {
  for (Real c : point)
    if (!std::isfinite(static_cast<double>(c))) throw DomainError("potentials", op, "non-finite point");
  if (spec.kind == PotentialKind::zero || spec.softening > 0.0) return;
  const Real r = std::sqrt(radius_squared(point));
  if (r == Real(0) || r <= Real(spec.exclusion_radius))
    throw DomainError("potentials", op, "point inside the origin exclusion ball with zero softening");
}

// Coefficients (a, b) of the tail (R/r)^p (a + b R/r) that continues the
// table with matching value and slope at R.
std::pair<double, double> tail_coefficients(const PotentialSpec& spec) {
  const auto& t = spec.table;
  const double R = t.r().back();
  const double p = 0.5 + spec.delta;
  const double v = t.value().back();
  // value: a + b = v;  -R d/dr: p a + (p + 1) b = -R v'
  const double b = -R * t.derivative(R) - p * v;
  return {v - b, b};
}

// Value and radial derivative of the tabulated profile at radius r.
template <class Real>
std::pair<Real, Real> table_profile(const PotentialSpec& spec, Real r) {
  const auto& t = spec.table;
  const double rd = static_cast<double>(r);
  if (rd >= t.r().back()) {
    const auto [a, b] = tail_coefficients(spec);
    const Real p = Real(0.5 + spec.delta);
    const Real s = Real(t.r().back()) / r;
    const Real lead = std::pow(s, p);
    return {lead * (Real(a) + Real(b) * s), -lead * (p * Real(a) + (p + 1) * Real(b) * s) / r};
  }
  return {Real(t.interpolate(rd)), Real(t.derivative(rd))};
}

}  // namespace

template <class Real>
Real eval_potential(const PotentialSpec& spec, std::span<const Real> point) {
  check_point(spec, point, "eval_potential");
  if (spec.kind == PotentialKind::zero) return Real(0);
  const Real s2 = Real(spec.softening) * Real(spec.softening);
  const Real r2 = radius_squared(point) + s2;
  switch (spec.kind) {
    case PotentialKind::coulomb: return Real(spec.kappa) / std::sqrt(r2);
    case PotentialKind::homogeneous: return Real(spec.kappa) * std::pow(r2, Real(-spec.alpha / 2.0));
    case PotentialKind::table: return Real(spec.kappa) * table_profile(spec, std::sqrt(r2)).first;
    case PotentialKind::zero: break;
  }
  return Real(0);
}

template <class Real>
void grad_potential(const PotentialSpec& spec, std::span<const Real> point, std::span<Real> out) {
  check_point(spec, point, "grad_potential");
  const std::size_t d = point.size();
  if (spec.kind == PotentialKind::zero) {
    for (std::size_t i = 0; i < d; ++i) out[i] = Real(0);
    return;
  }
  const Real s2 = Real(spec.softening) * Real(spec.softening);
  const Real r2 = radius_squared(point) + s2;
  if (spec.kind == PotentialKind::table) {
    const Real rho = std::sqrt(r2);
    const Real slope = rho > Real(0) ? Real(spec.kappa) * table_profile(spec, rho).second / rho : Real(0);
    for (std::size_t i = 0; i < d; ++i) out[i] = slope * point[i];
    return;
  }
  // d/dx_i kappa (r^2+s^2)^{-a/2} = -a kappa x_i (r^2+s^2)^{-a/2-1}
  const Real a = Real(spec.alpha);
  const Real factor = -a * Real(spec.kappa) * std::pow(r2, -a / Real(2) - Real(1));
  for (std::size_t i = 0; i < d; ++i) out[i] = factor * point[i];
}

std::vector<double> grad_potential(const PotentialSpec& spec, std::span<const double> point) {
  std::vector<double> g(point.size());
  grad_potential<double>(spec, point, g);
  return g;
}

template double eval_potential<double>(const PotentialSpec&, std::span<const double>);
template long double eval_potential<long double>(const PotentialSpec&, std::span<const long double>);
template void grad_potential<double>(const PotentialSpec&, std::span<const double>, std::span<double>);
template void grad_potential<long double>(const PotentialSpec&, std::span<const long double>,
                                          std::span<long double>);

}  // namespace stark::potentials
