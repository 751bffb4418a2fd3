#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "stark/error.hpp"
#include "stark/parabolic.hpp"

using namespace stark::parabolic;

namespace {

// Random point with r + x > 2 in dimension d.
std::vector<double> identity_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> coord(-200.0, 200.0);
  for (;;) {
    std::vector<double> p(d);
    for (double& c : p) c = coord(rng);
    if (r_plus_x<double>(p[0], std::span<const double>(p).subspan(1)) > 2.5) return p;
  }
}

// Random point with x > 0 and |y| < 0.999 x.
std::vector<double> admissible_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> logx(std::log(0.01), std::log(1e3));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> frac(0.0, 0.999);
  std::vector<double> p(d);
  p[0] = std::exp(logx(rng));
  double n2 = 0;
  for (int i = 1; i < d; ++i) {
    p[i] = unit(rng);
    n2 += p[i] * p[i];
  }
  const double scale = frac(rng) * p[0] / std::sqrt(n2);
  for (int i = 1; i < d; ++i) p[i] *= scale;
  return p;
}

std::span<const double> tail(const std::vector<double>& p) { return std::span<const double>(p).subspan(1); }

}  // namespace

TEST_CASE("to_parabolic examples") {
  const std::vector<double> y{4.0};
  const auto p = to_parabolic(3.0, y);
  CHECK(p.f == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
  CHECK(p.g[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(p.f * p.f + p.g[0] * p.g[0] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(p.f * p.f - p.g[0] * p.g[0] == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(p.f * std::abs(p.g[0]) == doctest::Approx(4.0).epsilon(1e-15));

  const std::vector<double> zero{0.0};
  const auto q = to_parabolic(-5.0, zero);
  CHECK(q.f == 1.0);
  CHECK(q.g[0] == 0.0);
}

TEST_CASE("mollifier plateaus, continuity and convexity") {
  CHECK(mollifier(0.2) == 1.0);
  CHECK(mollifier(0.5) == 1.0);
  CHECK(mollifier(2.0) == 2.0);
  CHECK(mollifier(7.5) == 7.5);
  CHECK(std::abs(mollifier(std::nextafter(2.0, 0.0)) - 2.0) < 1e-14);
  const double h = 1e-3;
  for (double t = 0.3; t <= 2.3; t += 0.01) {
    const double second = (mollifier(t + h) - 2 * mollifier(t) + mollifier(t - h)) / (h * h);
    CHECK(second >= -1e-7);
    CHECK(mollifier(t) >= std::max(1.0, t) - 1e-15);
  }
  // slope matches 1 at the upper joint
  CHECK((mollifier(2.0) - mollifier(2.0 - h)) / h == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("parabolic identities at random points") {
  std::mt19937_64 rng(21);
  for (int d : {2, 3, 4}) {
    for (int i = 0; i < 500; ++i) {
      const auto p = identity_point(rng, d);
      const auto pp = to_parabolic(p[0], tail(p));
      const double r = std::sqrt(norm_squared<double>(p));
      const double g2 = norm_squared<double>(pp.g);
      CHECK(std::abs(pp.f * pp.f + g2 - 2 * r) <= 1e-12 * r);
      CHECK(std::abs(pp.f * pp.f - g2 - 2 * p[0]) <= 1e-12 * r);
      CHECK(std::abs(pp.f * std::sqrt(g2) - std::sqrt(norm_squared<double>(tail(p)))) <= 1e-12 * r);
    }
  }
}

TEST_CASE("jacobian_det examples and domain") {
  const std::vector<double> y2{4.0};
  CHECK(jacobian_det(3.0, y2, 2) == doctest::Approx(0.1).epsilon(1e-15));
  const std::vector<double> y3{4.0, 0.0};
  CHECK(jacobian_det(3.0, y3, 3) == doctest::Approx(1.0 / (10.0 * std::sqrt(8.0))).epsilon(1e-15));
  const std::vector<double> small{0.1};
  CHECK_THROWS_AS(jacobian_det(0.5, small, 2), stark::DomainError);
  CHECK_THROWS_AS(jacobian_det(3.0, y2, 3), stark::DomainError);
}

TEST_CASE("jacobian_det matches the finite-difference determinant") {
  std::mt19937_64 rng(22);
  for (int d : {2, 3, 4}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = identity_point(rng, d);
      const double r = std::sqrt(norm_squared<double>(p));
      const double h = 1e-5 * r;
      Eigen::MatrixXd jac(d, d);
      bool inside = true;
      for (int j = 0; j < d; ++j) {
        auto up = p, down = p;
        up[j] += h;
        down[j] -= h;
        inside = inside && r_plus_x<double>(down[0], tail(down)) > 2.0 && r_plus_x<double>(up[0], tail(up)) > 2.0;
        const auto a = to_parabolic(up[0], tail(up));
        const auto b = to_parabolic(down[0], tail(down));
        jac(0, j) = (a.f - b.f) / (2 * h);
        for (int i = 1; i < d; ++i) jac(i, j) = (a.g[i - 1] - b.g[i - 1]) / (2 * h);
      }
      const double exact = jacobian_det(p[0], tail(p), d);
      const auto pp = to_parabolic(p[0], tail(p));
      CHECK(exact * (pp.f * pp.f + norm_squared<double>(pp.g)) * std::pow(pp.f, d - 2) == doctest::Approx(1.0));
      if (inside) CHECK(std::abs(jac.determinant()) == doctest::Approx(exact).epsilon(1e-6));
    }
  }
}

TEST_CASE("orthogonality and unit-speed identity for grad f") {
  std::mt19937_64 rng(23);
  double worst_orth = 0.0, worst_norm = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int d = 2 + i % 3;
    const auto p = identity_point(rng, d);
    std::vector<double> gf(d);
    f_gradient<double>(p[0], tail(p), gf);
    const double f = to_parabolic(p[0], tail(p)).f;
    const double r = std::sqrt(norm_squared<double>(p));
    for (int k = 1; k < d; ++k) {
      // grad g_k = e_k / f - y_k grad f / f^2
      double dot = 0.0;
      for (int j = 0; j < d; ++j) dot += gf[j] * ((j == k ? 1.0 / f : 0.0) - p[k] * gf[j] / (f * f));
      worst_orth = std::max(worst_orth, std::abs(dot));
    }
    worst_norm = std::max(worst_norm, std::abs(2 * r * norm_squared<double>(gf) - 1.0));
  }
  CHECK(worst_orth <= 1e-10);
  CHECK(worst_norm <= 1e-10);
}

TEST_CASE("f squared is convex") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> coord(-20.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const int d = 2 + i % 3;
    std::vector<double> p(d);
    for (double& c : p) c = coord(rng);
    const double r = std::sqrt(norm_squared<double>(p));
    if (r < 1e-3) continue;
    const double t = r_plus_x<double>(p[0], tail(p));
    // grad^2 fbreve(r + x) = fbreve'' grad r grad r^T + fbreve' grad^2 r
    const double h = 1e-4;
    const double d1 = (mollifier(t + h) - mollifier(t - h)) / (2 * h);
    const double d2 = std::max(0.0, (mollifier(t + h) - 2 * mollifier(t) + mollifier(t - h)) / (h * h));
    Eigen::VectorXd u(d);
    for (int j = 0; j < d; ++j) u(j) = p[j] / r;
    Eigen::VectorXd grad_t = u;
    grad_t(0) += 1.0;
    const Eigen::MatrixXd hess_r = (Eigen::MatrixXd::Identity(d, d) - u * u.transpose()) / r;
    const Eigen::MatrixXd hess = d2 * grad_t * grad_t.transpose() + d1 * hess_r;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("theta_calculus examples") {
  const std::vector<double> y{4.0};
  const auto th = theta_calculus(3.0, y, 2);
  const double f = std::sqrt(8.0);
  CHECK(th.value == doctest::Approx(f * f * f / 3).epsilon(1e-15));
  CHECK(th.gradient[0] == doctest::Approx(f * f * f / 10).epsilon(1e-15));
  CHECK(th.gradient[1] == doctest::Approx(4 * f / 10).epsilon(1e-15));
  CHECK(th.laplacian == doctest::Approx(f / 5).epsilon(1e-15));
  CHECK_THROWS_AS(theta_calculus(-5.0, std::vector<double>{0.5}, 2), stark::DomainError);
}

TEST_CASE("theta_calculus derivatives against finite differences") {
  std::mt19937_64 rng(25);
  for (int d : {2, 3, 4}) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto p = identity_point(rng, d);
      const auto th = theta_calculus(p[0], tail(p), d);
      const double r = std::sqrt(norm_squared<double>(p));
      const double h = 1e-4 * r;
      double trace = 0.0;
      for (int j = 0; j < d; ++j) {
        auto up = p, down = p;
        up[j] += h;
        down[j] -= h;
        if (r_plus_x<double>(down[0], tail(down)) <= 2.0 || r_plus_x<double>(up[0], tail(up)) <= 2.0) continue;
        const auto a = theta_calculus(up[0], tail(up), d);
        const auto b = theta_calculus(down[0], tail(down), d);
        const double gnorm = std::sqrt(norm_squared<double>(th.gradient));
        CHECK(std::abs((a.value - b.value) / (2 * h) - th.gradient[j]) <= 1e-7 * gnorm);
        for (int i = 0; i < d; ++i) {
          const double fd = (a.gradient[i] - b.gradient[i]) / (2 * h);
          CHECK(std::abs(fd - th.hess(i, j)) <= 1e-6 * (std::abs(th.hess(i, j)) + gnorm / r));
          CHECK(th.hess(i, j) == doctest::Approx(th.hess(j, i)).epsilon(1e-14));
        }
        trace += th.hess(j, j);
      }
      if (trace != 0.0) CHECK(std::abs(trace - th.laplacian) <= 1e-10 * std::max(1.0, std::abs(th.laplacian)));
    }
  }
}

TEST_CASE("theta1_calculus on the axis") {
  for (double x : {0.5, 2.0, 100.0, 1e4}) {
    const std::vector<double> y{0.0, 0.0};
    const auto t1 = theta1_calculus(x, y);
    CHECK(t1.value == doctest::Approx(std::pow(2 * x, 1.5) / 3).epsilon(1e-14));
    CHECK(t1.gradient[0] == doctest::Approx(std::sqrt(2 * x)).epsilon(1e-15));
    CHECK(t1.gradient[1] == 0.0);
  }
  CHECK_THROWS_AS(theta1_calculus(1.0, std::vector<double>{1.0}), stark::DomainError);
  CHECK_THROWS_AS(theta1_calculus(-1.0, std::vector<double>{0.0}), stark::DomainError);
}

TEST_CASE("theta1 solves the eikonal equation") {
  std::mt19937_64 rng(26);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto p = admissible_point(rng, 2 + i % 3);
    const auto t1 = theta1_calculus(p[0], tail(p));
    worst = std::max(worst, std::abs(0.5 * norm_squared<double>(t1.gradient) - p[0]));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("theta1 derivatives against finite differences") {
  std::mt19937_64 rng(27);
  for (int d : {2, 3, 4}) {
    for (int trial = 0; trial < 300; ++trial) {
      auto p = admissible_point(rng, d);
      // keep a stencil's distance from the caustic
      const double ratio = std::sqrt(norm_squared<double>(tail(p))) / p[0];
      if (ratio > 0.95) continue;
      const auto t1 = theta1_calculus(p[0], tail(p));
      const double h = 1e-5 * p[0];
      const double hnorm = std::sqrt(std::inner_product(t1.hessian.begin(), t1.hessian.end(), t1.hessian.begin(), 0.0));
      double trace = 0.0;
      for (int j = 0; j < d; ++j) {
        auto up = p, down = p;
        up[j] += h;
        down[j] -= h;
        const auto a = theta1_calculus(up[0], tail(up));
        const auto b = theta1_calculus(down[0], tail(down));
        CHECK(std::abs((a.value - b.value) / (2 * h) - t1.gradient[j]) <=
              1e-7 * std::sqrt(norm_squared<double>(t1.gradient)));
        for (int i = 0; i < d; ++i) {
          const double fd = (a.gradient[i] - b.gradient[i]) / (2 * h);
          CHECK(std::abs(fd - t1.hess(i, j)) <= 1e-6 * hnorm);
        }
        trace += t1.hess(j, j);
      }
      CHECK(std::abs(trace - t1.laplacian) <= 1e-10 * std::max(1.0, std::abs(t1.laplacian)));
    }
  }
}

TEST_CASE("theta1 Hessian matches the y/|y| display away from the axis") {
  // literal components with sqrt(x - s) and y/|y|
  const double x = 7.0;
  const std::vector<double> y{2.0, -3.0};
  const double ay = std::hypot(y[0], y[1]);
  const double s = std::sqrt(x * x - ay * ay);
  const auto t1 = theta1_calculus(x, y);
  CHECK(t1.hess(0, 0) == doctest::Approx(0.5 / s * std::sqrt(x + s)).epsilon(1e-14));
  for (int a = 0; a < 2; ++a) {
    CHECK(t1.hess(0, a + 1) == doctest::Approx(-0.5 * (y[a] / ay) / s * std::sqrt(x - s)).epsilon(1e-13));
    for (int b = 0; b < 2; ++b) {
      const double lit = 0.5 * y[a] * y[b] / (ay * ay) / s * std::sqrt(x + s) +
                         std::sqrt(x - s) / ay * ((a == b ? 1.0 : 0.0) - y[a] * y[b] / (ay * ay));
      CHECK(t1.hess(a + 1, b + 1) == doctest::Approx(lit).epsilon(1e-13));
    }
  }
  // spatial block against central differences of the gradient
  const double h = 1e-5;
  for (int b = 0; b < 2; ++b) {
    auto up = y, down = y;
    up[b] += h;
    down[b] -= h;
    const auto ga = theta1_calculus(x, up).gradient;
    const auto gb = theta1_calculus(x, down).gradient;
    for (int a = 0; a < 2; ++a)
      CHECK(t1.hess(a + 1, b + 1) == doctest::Approx((ga[a + 1] - gb[a + 1]) / (2 * h)).epsilon(1e-8));
  }
}

TEST_CASE("theta1 - theta is fourth order in |y|/x") {
  const double x = 1e3;
  std::vector<double> lr, ldiff, lf;
  for (double ratio : {0.01, 0.02, 0.04}) {
    const std::vector<double> y{ratio * x};
    const double f = std::sqrt(r_plus_x<double>(x, y));
    lr.push_back(std::log(ratio));
    ldiff.push_back(std::log(std::abs(theta1_minus_theta(x, y)) / (f * f * f)));
    lf.push_back(std::log(std::abs(f - f1(x, y)) / f));
  }
  CHECK(oracle::slope(lr, ldiff) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(oracle::slope(lr, lf) == doctest::Approx(4.0).epsilon(0.05));
  const std::vector<double> axis{0.0};
  CHECK(std::abs(theta1_minus_theta(1e6, axis)) <= 1e-15 * std::pow(2e6, 1.5));
}

TEST_CASE("theta1 Hessian leading form") {
  const double x = 1e3;
  double lo = 1e300, hi = 0.0;
  for (double ratio = 1e-3; ratio <= 1e-1 * 1.0001; ratio *= std::pow(10.0, 0.1)) {
    const std::vector<double> y{ratio * x, 0.0};
    const auto t1 = theta1_calculus(x, y);
    const double f = std::sqrt(r_plus_x<double>(x, y));
    const double r = std::hypot(x, y[0]);
    Eigen::Matrix3d dev;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) dev(i, j) = 2 * r / f * t1.hess(i, j) - (i == j ? 1.0 : 0.0);
    const double scaled = dev.norm() / ratio;
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  CHECK(hi < 2.0);
  CHECK(hi / lo < 1.5);
}
