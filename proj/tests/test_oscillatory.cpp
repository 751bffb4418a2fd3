#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "stark/error.hpp"
#include "stark/oscillatory.hpp"
#include "stark/parabolic.hpp"

using namespace stark::oscillatory;

namespace {

constexpr double kPi = std::numbers::pi;

// int e^{i(-eta^3/6 + a eta)} deta along eta = t e^{-i pi/8} (t > 0) and
// eta = -t e^{i pi/8}, where the cubic term decays.
Complex eta_integral_contour(double a) {
  const Complex down = std::polar(1.0, -kPi / 8), up = std::polar(1.0, kPi / 8);
  auto F = [a](Complex eta) { return std::exp(Complex(0, 1) * (-eta * eta * eta / 6.0 + a * eta)); };
  boost::math::quadrature::exp_sinh<double> integrator;
  auto re = [&](double t) { return (down * F(t * down) + up * F(-t * up)).real(); };
  auto im = [&](double t) { return (down * F(t * down) + up * F(-t * up)).imag(); };
  return {integrator.integrate(re, 1e-14), integrator.integrate(im, 1e-14)};
}

const XiProfile kAxisXi = XiProfile::bump({0.0}, 3.0);
const XiProfile kOffAxisXi = XiProfile::bump({2.0}, 2.5);
const std::vector<double> kDoublings = {50, 100, 200, 400, 800};

}  // namespace

TEST_CASE("Airy reduction against rotated-contour quadrature") {
  const double zeta[1] = {0.0};
  double worst = 0;
  for (double a = -10.0; a <= 10.0; a += 0.25) {
    const Complex oracle = eta_integral_contour(a);
    worst = std::max(worst, std::abs(airy_reduction(a, zeta, 0.0) - oracle));
  }
  CHECK(worst < 1e-8);

  // a = x + lambda - |zeta|^2/2 enters only through the combination
  const double z2[2] = {1.0, 2.0};
  CHECK(std::abs(airy_reduction(3.0, z2, 0.5) - airy_reduction(1.0, zeta, 0.0)) < 1e-14);
}

TEST_CASE("Airy reduction examples") {
  const double zeta[1] = {0.0};
  // 2^{1/3} 2 pi Ai(0) with Ai(0) = 3^{-2/3}/Gamma(2/3)
  const double ai0 = 0.355028053887817239;
  CHECK(std::abs(airy_reduction(0.0, zeta, 0.0) - Complex(std::cbrt(2.0) * 2 * kPi * ai0)) < 1e-13);
  for (double a : {-4.0, 4.0}) {
    const Complex v = airy_reduction(a, zeta, 0.0);
    CHECK(v.imag() == 0.0);
    CHECK(std::abs(v - eta_integral_contour(a)) < 1e-9);
  }
  // exponentially small for negative a, oscillatory of size O(a^{-1/4}) for positive a
  CHECK(std::abs(airy_reduction(-4.0, zeta, 0.0)) < 1e-3);
  CHECK(std::abs(airy_reduction(4.0, zeta, 0.0)) > 0.5);
}

TEST_CASE("xi profiles") {
  const auto b = XiProfile::bump({1.0}, 2.0, Complex(0, 2));
  CHECK(std::abs(b(1.0) - Complex(0, 2 * std::exp(-1.0))) < 1e-15);
  CHECK(b(3.0) == Complex(0.0));
  CHECK(b(-1.0) == Complex(0.0));
  const auto r = b.reflected_conjugate();
  for (double z : {-2.5, -1.0, 0.3, 1.7})
    CHECK(std::abs(r(z) - std::conj(b(-z))) < 1e-15);

  std::vector<double> knots;
  std::vector<Complex> values;
  for (int i = 0; i <= 40; ++i) {
    const double t = -1.0 + 0.05 * i;
    knots.push_back(t);
    values.push_back(Complex(std::pow(1 - t * t, 4), t * std::pow(1 - t * t, 4)));
  }
  const auto s = XiProfile::samples(knots, values);
  CHECK(std::abs(s(0.5) - Complex(std::pow(0.75, 4), 0.5 * std::pow(0.75, 4))) < 1e-4);
  CHECK(s(1.2) == Complex(0.0));
  CHECK(std::abs(s.reflected_conjugate()(-0.5) - std::conj(s(0.5))) < 1e-15);

  CHECK_THROWS_AS(XiProfile::bump({0.0}, 0.0), stark::ConfigError);
  CHECK_THROWS_AS(XiProfile::samples({0, 1, 2}, {1, 1, 1}), stark::ConfigError);
  CHECK_THROWS_AS(XiProfile::bump({0.0}, 1.0) + XiProfile::bump({0.0, 0.0}, 1.0), stark::ConfigError);
}

TEST_CASE("zero xi and linearity") {
  const double y[1] = {3.0};
  CHECK(free_eigenfunction(40, y, XiProfile::zero(1), 0.0) == Complex(0.0));
  CHECK(stationary_phase_eigenfunction(40, y, XiProfile::zero(1), 0.0) == Complex(0.0));

  EigenfunctionOptions opt;
  opt.tol = 1e-10;
  const auto xi1 = XiProfile::bump({0.5}, 1.5);
  const auto xi2 = XiProfile::bump({-1.0}, 0.7, Complex(0.3, -2.0));
  for (double x : {10.0, 60.0, 300.0}) {
    const Complex sum = free_eigenfunction(x, y, xi1 + xi2, 0.25, opt);
    const Complex parts = free_eigenfunction(x, y, xi1, 0.25, opt) + free_eigenfunction(x, y, xi2, 0.25, opt);
    CHECK(std::abs(sum - parts) <= 2 * opt.tol);
    const Complex scaled = free_eigenfunction(x, y, xi1.scaled(Complex(0, 3)), 0.25, opt);
    CHECK(std::abs(scaled - Complex(0, 3) * free_eigenfunction(x, y, xi1, 0.25, opt)) <= 2 * opt.tol);
  }
}

TEST_CASE("free eigenfunction solves the Stark equation") {
  // (-Delta/2 - x - lambda) u = 0, checked with a 5-point Laplacian; residual is O(h^2)
  EigenfunctionOptions opt;
  opt.tol = 1e-14;
  const auto xi = XiProfile::bump({0.3}, 1.2);
  const double lambda = 0.4, x0 = 4.0, y0 = 1.5;
  auto u = [&](double x, double y) {
    const double yy[1] = {y};
    return free_eigenfunction(x, yy, xi, lambda, opt);
  };
  auto residual = [&](double h) {
    const Complex c = u(x0, y0);
    const Complex lap = (u(x0 + h, y0) + u(x0 - h, y0) + u(x0, y0 + h) + u(x0, y0 - h) - 4.0 * c) / (h * h);
    return std::abs(-0.5 * lap - (x0 + lambda) * c) / std::abs(c);
  };
  const double r1 = residual(0.04), r2 = residual(0.02), r3 = residual(0.01);
  // leading truncation term h^2/24 (d_x^4 + d_y^4) u with |eta|^2 <= 2(x + lambda)
  const double eta2 = 2 * (x0 + lambda);
  CHECK(r3 < 0.01 * 0.01 * eta2 * eta2 / 12);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(r2 / r3 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("conjugate symmetry of the exact eigenfunction") {
  EigenfunctionOptions opt;
  opt.tol = 1e-12;
  const auto xi = XiProfile::bump({0.7}, 1.1, Complex(1.0, 0.5)) + XiProfile::bump({-0.2}, 0.6, Complex(0.0, -1.0));
  const auto mirror = xi.reflected_conjugate();
  for (double x : {5.0, 80.0}) {
    for (double y : {-4.0, 0.0, 2.5}) {
      const double yy[1] = {y};
      const Complex a = free_eigenfunction(x, yy, xi, -0.3, opt);
      const Complex b = free_eigenfunction(x, yy, mirror, -0.3, opt);
      CHECK(std::abs(b - std::conj(a)) <= 2 * opt.tol);
    }
  }
  // d = 3 with a tensor bump
  const auto xi3 = XiProfile::bump({0.4, -0.2}, 0.8, Complex(0.5, 1.0));
  const double y3[2] = {1.0, -2.0};
  const Complex a = free_eigenfunction(20, y3, xi3, 0.0, opt);
  const Complex b = free_eigenfunction(20, y3, xi3.reflected_conjugate(), 0.0, opt);
  CHECK(std::abs(a) > 1e-6);
  CHECK(std::abs(b - std::conj(a)) <= 2 * opt.tol);
}

TEST_CASE("stationary phase: support selection and parity") {
  // xi supported in zeta < 0; at y < 0 the omega term sees the support and -omega does not
  const auto xi = XiProfile::bump({-1.0}, 0.9);
  const double x = 200, yy[1] = {-20.0};
  const double omega = yy[0] / std::sqrt(2 * x);
  REQUIRE(xi(omega) != Complex(0.0));
  REQUIRE(xi(-omega) == Complex(0.0));
  const double theta1 = stark::parabolic::theta1_calculus(x, yy).value;
  const Complex plus = std::polar(1.0, theta1 - kPi / 2) / (std::sqrt(2 * kPi) * std::sqrt(2 * x)) * xi(omega);
  CHECK(std::abs(stationary_phase_eigenfunction(x, yy, xi, 0.0) - plus) < 1e-15);

  // xi(zeta) -> xi(-zeta) swaps the xi factors of the two terms
  const auto flipped = xi.reflected_conjugate();
  const Complex minus = std::polar(1.0, kPi / 2 - theta1) / (std::sqrt(2 * kPi) * std::sqrt(2 * x)) * flipped(-omega);
  CHECK(std::abs(stationary_phase_eigenfunction(x, yy, flipped, 0.0) - minus) < 1e-15);
}

TEST_CASE("stationary phase matches the exact eigenfunction at x = 200 on the axis") {
  const double y[1] = {0.0};
  const auto axis_bump = XiProfile::bump({0.0}, 2.0);
  const auto s = compare_eigenfunction(200, {0.0}, axis_bump, 0.0);
  CHECK(s.rel_error <= 0.05);
  CHECK(std::abs(s.exact.imag()) < 1e-12);
  CHECK(std::abs(stationary_phase_eigenfunction(200, y, axis_bump, 0.0) - s.asymptotic) == 0.0);
}

TEST_CASE("stationary phase in d = 3 on the axis") {
  EigenfunctionOptions opt;
  opt.tol = 1e-11;
  const auto s = compare_eigenfunction(200, {0.0, 0.0}, XiProfile::bump({0.0, 0.0}, 3.0), 0.0, opt);
  CHECK(s.rel_error <= 0.05);
}

TEST_CASE("asymptotic convergence along y/x = 0.05") {
  const auto r = asymptotic_convergence(0.05, kDoublings, kOffAxisXi, 0.0);
  REQUIRE(r.samples.size() == kDoublings.size());
  CHECK(r.samples.back().rel_error < 0.01);
  CHECK(r.exponent() <= -0.5);
  CHECK(r.monotone(0.1));
  // frozen reference of the fit
  CHECK(r.exponent() == doctest::Approx(-1.486).epsilon(0.01));
  CHECK(r.samples.back().rel_error == doctest::Approx(7.429e-3).epsilon(0.01));
}

TEST_CASE("asymptotic convergence on the axis") {
  const auto r = asymptotic_convergence(0.0, kDoublings, kAxisXi, 0.0);
  CHECK(r.samples.back().rel_error < 0.01);
  CHECK(r.exponent() <= -0.5);
  CHECK(r.monotone(0.1));
  CHECK(r.exponent() == doctest::Approx(-1.136).epsilon(0.01));
}

TEST_CASE("energy shift enters through x + lambda") {
  const auto a = compare_eigenfunction(400, {10.0}, kOffAxisXi, 0.0);
  const auto b = compare_eigenfunction(399.25, {10.0}, kOffAxisXi, 0.75);
  CHECK(std::abs(a.exact - b.exact) < 1e-9);
  CHECK(std::abs(a.asymptotic - b.asymptotic) < 1e-12);
}

TEST_CASE("oscillatory error reporting") {
  const double at_caustic[1] = {100.0};
  CHECK_THROWS_AS(stationary_phase_eigenfunction(100, at_caustic, kAxisXi, 0.0), stark::DomainError);
  const double beyond[1] = {150.0};
  CHECK_THROWS_AS(stationary_phase_eigenfunction(100, beyond, kAxisXi, 0.0), stark::DomainError);
  const double y[1] = {1.0};
  CHECK_THROWS_AS(stationary_phase_eigenfunction(-5, y, kAxisXi, 0.0), stark::DomainError);

  EigenfunctionOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(free_eigenfunction(10, y, kAxisXi, 0.0, bad), stark::ConfigError);
  const double y3[2] = {1.0, 0.0};
  CHECK_THROWS_AS(free_eigenfunction(10, y3, kAxisXi, 0.0), stark::ConfigError);

  EigenfunctionOptions starved;
  starved.tol = 1e-14;
  starved.max_panels = 1;
  try {
    free_eigenfunction(800, y, kAxisXi, 0.0, starved);
    FAIL("expected a budget error");
  } catch (const stark::BudgetError& e) {
    CHECK(std::string(e.budget()) == "tol");
    CHECK(std::string(e.module()) == "oscillatory");
  }
  CHECK_THROWS_AS(asymptotic_convergence(0.05, {100, 50}, kAxisXi, 0.0), stark::ConfigError);
  CHECK_THROWS_AS(asymptotic_convergence(0.0, {50, 100}, XiProfile::zero(1), 0.0), stark::DomainError);
}
