#include "stark/parabolic.hpp"

namespace stark::parabolic {

double mollifier(double t) {
  if (t <= 0.5) return 1.0;
  if (t >= 2.0) return t;
  const double u = (t - 0.5) / 1.5;
  const double u4 = u * u * u * u;
  // 1 + 1.5 * 168 * int_0^u int_0^v Beta(3,6)-kernel
  const double poly = u4 * (1.0 / 12 + u * (-1.0 / 4 + u * (1.0 / 3 + u * (-5.0 / 21 + u * (5.0 / 56 - u / 72)))));
  return 1.0 + 252.0 * poly;
}

bool in_identity_regime(double x, std::span<const double> y) { return r_plus_x(x, y) > 2.0; }

ParabolicPoint to_parabolic(double x, std::span<const double> y) {
  ParabolicPoint p;
  p.f = std::sqrt(mollifier(r_plus_x(x, y)));
  p.g.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) p.g[i] = y[i] / p.f;
  return p;
}

namespace {

void require_identity(double x, std::span<const double> y, int d, const char* op) {
  if (d < 2 || static_cast<std::size_t>(d) != y.size() + 1)
    throw DomainError("parabolic", op, "dimension does not match the point");
  if (!in_identity_regime(x, y)) throw DomainError("parabolic", op, "outside the identity regime r + x > 2");
}

}  // namespace

double jacobian_det(double x, std::span<const double> y, int d) {
  require_identity(x, y, d, "jacobian_det");
  const auto p = to_parabolic(x, y);
  const double g2 = norm_squared<double>(p.g);
  return std::pow(p.f, 2.0 - d) / (p.f * p.f + g2);
}

PhaseData theta_calculus(double x, std::span<const double> y, int d) {
  require_identity(x, y, d, "theta_calculus");
  const std::size_t n = static_cast<std::size_t>(d);
  const double f = std::sqrt(r_plus_x(x, y));
  const double r = std::sqrt(x * x + norm_squared(y));
  const double f3 = f * f * f;
  const double r2 = r * r;
  const double r3 = r2 * r;

  PhaseData out;
  out.value = f3 / 3.0;
  out.gradient.resize(n);
  out.gradient[0] = f3 / (2 * r);
  for (std::size_t a = 1; a < n; ++a) out.gradient[a] = f * y[a - 1] / (2 * r);

  out.hessian.assign(n * n, 0.0);
  auto h = [&](std::size_t i, std::size_t j) -> double& { return out.hessian[i * n + j]; };
  h(0, 0) = -0.5 * x * f3 / r3 + 0.75 * f3 / r2;
  for (std::size_t a = 1; a < n; ++a) {
    const double ya = y[a - 1];
    h(0, a) = h(a, 0) = -0.5 * ya * f3 / r3 + 0.75 * ya * f / r2;
    for (std::size_t b = 1; b < n; ++b) {
      const double yb = y[b - 1];
      h(a, b) = -0.5 * ya * yb * f / r3 + 0.25 * ya * yb / (r2 * f) + (a == b ? 0.5 * f / r : 0.0);
    }
  }
  out.laplacian = 0.5 * d * f / r;
  return out;
}

PhaseData theta1_calculus(double x, std::span<const double> y) {
  const double y2 = norm_squared(y);
  require_theta1_domain(x, y2, "theta1_calculus");
  const std::size_t n = y.size() + 1;
  const double ay = std::sqrt(y2);
  const double s = std::sqrt((x - ay) * (x + ay));
  const double root = std::sqrt(x + s);

  PhaseData out;
  out.value = 4.0 / 3.0 * root * (x - 0.5 * s);
  out.gradient.resize(n);
  theta1_gradient<double>(x, y, out.gradient);

  // Closed-form Hessian with sqrt(x - s) = |y| / sqrt(x + s), which removes
  // the 0/0 of the y/|y| factors on the axis.
  out.hessian.assign(n * n, 0.0);
  auto h = [&](std::size_t i, std::size_t j) -> double& { return out.hessian[i * n + j]; };
  h(0, 0) = 0.5 * root / s;
  const double root3 = root * root * root;
  for (std::size_t a = 1; a < n; ++a) {
    const double ya = y[a - 1];
    h(0, a) = h(a, 0) = -0.5 * ya / (s * root);
    for (std::size_t b = 1; b < n; ++b) {
      const double yb = y[b - 1];
      h(a, b) = (a == b ? 1.0 / root : 0.0) + ya * yb / (2 * s * root3);
    }
  }
  out.laplacian = 0.0;
  for (std::size_t i = 0; i < n; ++i) out.laplacian += h(i, i);
  return out;
}

double theta1_minus_theta(double x, std::span<const double> y) {
  if (!in_identity_regime(x, y))
    throw DomainError("parabolic", "theta1_minus_theta", "outside the identity regime r + x > 2");
  const double f2 = r_plus_x(x, y);
  return theta1_calculus(x, y).value - f2 * std::sqrt(f2) / 3.0;
}

double f1(double x, std::span<const double> y) { return std::cbrt(3.0 * theta1_calculus(x, y).value); }

}  // namespace stark::parabolic
