#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "stark/error.hpp"
#include "stark/potentials.hpp"

using namespace stark::potentials;

TEST_CASE("eval_potential examples") {
  const std::vector<double> p34{3.0, 4.0};
  CHECK(eval_potential(PotentialSpec::zero(), p34) == 0.0);
  CHECK(eval_potential(PotentialSpec::coulomb(1.0, 0.0), p34) == doctest::Approx(0.2).epsilon(1e-15));
  const std::vector<double> p011{0.0, 1.0, 1.0};
  CHECK(eval_potential(PotentialSpec::homogeneous(2.0, 2.0), p011) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("grad_potential examples") {
  const std::vector<double> p34{3.0, 4.0};
  auto g0 = grad_potential(PotentialSpec::zero(), p34);
  CHECK(g0[0] == 0.0);
  CHECK(g0[1] == 0.0);
  auto gc = grad_potential(PotentialSpec::coulomb(1.0, 0.0), p34);
  CHECK(gc[0] == doctest::Approx(-3.0 / 125).epsilon(1e-14));
  CHECK(gc[1] == doctest::Approx(-4.0 / 125).epsilon(1e-14));
  const std::vector<double> p10{1.0, 0.0};
  auto gh = grad_potential(PotentialSpec::homogeneous(1.0, 2.0), p10);
  CHECK(gh[0] == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(gh[1] == 0.0);
}

TEST_CASE("origin with zero softening is a domain error") {
  const std::vector<double> origin{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(eval_potential(PotentialSpec::coulomb(1.0, 0.0), origin), stark::DomainError);
  CHECK_THROWS_AS(grad_potential(PotentialSpec::homogeneous(1.0, 1.5), origin), stark::DomainError);
  CHECK(std::isfinite(eval_potential(PotentialSpec::coulomb(1.0, 1e-3), origin)));
  auto ball = PotentialSpec::coulomb(1.0, 0.0);
  ball.exclusion_radius = 0.5;
  const std::vector<double> inside{0.3, 0.1};
  CHECK_THROWS_AS(eval_potential(ball, inside), stark::DomainError);
  CHECK(eval_potential(PotentialSpec::zero(), origin) == 0.0);
}

TEST_CASE("validate enforces the potential class") {
  CHECK_NOTHROW(validate(PotentialSpec::coulomb(1.0), 3));
  CHECK_THROWS_AS(validate(PotentialSpec::homogeneous(1.0, 2.6), 3), stark::ConfigError);
  CHECK_THROWS_AS(validate(PotentialSpec::homogeneous(1.0, 0.5), 3), stark::ConfigError);
  auto bad = PotentialSpec::coulomb(1.0);
  bad.alpha = 2.0;
  CHECK_THROWS_AS(validate(bad, 3), stark::ConfigError);
  CHECK(PotentialSpec::homogeneous(1.0, 0.8).delta == doctest::Approx(0.3));
  CHECK(PotentialSpec::homogeneous(1.0, 2.0).delta == 0.5);
  CHECK_THROWS_AS(RadialTable({0.0, 1.0, 1.0, 2.0}, {1, 1, 1, 1}), stark::ConfigError);
}

TEST_CASE("table potential follows the tabulated power law and its declared tail") {
  std::vector<double> r, v;
  for (int i = 0; i <= 200; ++i) {
    r.push_back(0.5 + 0.5 * i);
    v.push_back(1.0 / r.back());
  }
  const auto spec = PotentialSpec::tabulated(RadialTable(r, v), 0.5);
  const std::vector<double> mid{3.3, 4.1};
  CHECK(eval_potential(spec, mid) == doctest::Approx(1.0 / std::hypot(3.3, 4.1)).epsilon(1e-5));
  // the tail continues the last sample in value and slope and keeps the declared decay
  const std::vector<double> edge{100.0 - 1e-9, 0.0}, beyond{100.0 + 1e-9, 0.0};
  CHECK(eval_potential(spec, edge) == doctest::Approx(eval_potential(spec, beyond)).epsilon(1e-12));
  CHECK(grad_potential(spec, edge)[0] == doctest::Approx(grad_potential(spec, beyond)[0]).epsilon(1e-9));
  const std::vector<double> far{3e5, 4e5}, farther{6e5, 8e5};
  CHECK(eval_potential(spec, far) == doctest::Approx(1.0 / 5e5).epsilon(1e-2));
  CHECK(eval_potential(spec, far) / eval_potential(spec, farther) == doctest::Approx(2.0).epsilon(1e-5));
  auto g = grad_potential(spec, mid);
  const double r3 = std::pow(std::hypot(3.3, 4.1), 3);
  CHECK(g[0] == doctest::Approx(-3.3 / r3).epsilon(1e-4));
}

TEST_CASE("analytic gradients agree with central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  const std::vector<PotentialSpec> specs{PotentialSpec::coulomb(0.7, 1e-3), PotentialSpec::homogeneous(1.3, 1.5),
                                         PotentialSpec::homogeneous(-0.4, 2.2, 0.2)};
  for (const auto& spec : specs) {
    for (int trial = 0; trial < 40; ++trial) {
      std::vector<double> p{coord(rng), coord(rng), coord(rng)};
      const double r = std::hypot(p[0], p[1], p[2]);
      if (r < 1.0) continue;
      const auto g = grad_potential(spec, p);
      for (std::size_t i = 0; i < 3; ++i) {
        const double h = 1e-5 * r;
        auto up = p, down = p;
        up[i] += h;
        down[i] -= h;
        const double fd = (eval_potential(spec, up) - eval_potential(spec, down)) / (2 * h);
        const double norm = std::hypot(g[0], g[1], g[2]);
        CHECK(std::abs(fd - g[i]) <= 1e-6 * norm);
      }
    }
  }
}

TEST_CASE("decay bounds of the short-range class") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logr(0.0, std::log(1e6));
  std::uniform_real_distribution<double> angle(0.0, 2 * M_PI);
  const std::vector<PotentialSpec> specs{PotentialSpec::coulomb(1.0, 1e-3), PotentialSpec::homogeneous(1.0, 1.5),
                                         PotentialSpec::homogeneous(1.0, 0.8)};
  for (const auto& spec : specs) {
    double c_value = 0.0, c_grad = 0.0;
    double c_value_small = 0.0, c_grad_small = 0.0;
    for (int i = 0; i < 500; ++i) {
      const double r = std::exp(logr(rng));
      const double phi = angle(rng);
      const std::vector<double> p{r * std::cos(phi), r * std::sin(phi)};
      const double q = std::abs(eval_potential(spec, p));
      const auto g = grad_potential(spec, p);
      const double value_ratio = q * std::pow(r, (1 + 2 * spec.delta) / 2);
      const double grad_ratio = std::hypot(g[0], g[1]) * std::pow(r, (2 + 2 * spec.delta) / 2);
      c_value = std::max(c_value, value_ratio);
      c_grad = std::max(c_grad, grad_ratio);
      if (r < 10) {
        c_value_small = std::max(c_value_small, value_ratio);
        c_grad_small = std::max(c_grad_small, grad_ratio);
      }
    }
    // the fitted constant from the first decade already bounds all radii
    CHECK(c_value <= std::max(c_value_small, std::abs(spec.kappa)) * 1.0001);
    CHECK(c_grad <= std::max(c_grad_small, std::abs(spec.kappa) * spec.alpha) * 1.0001);
  }
}
