#include "stark/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "stark/error.hpp"

namespace stark::special {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos approximation, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

double gamma_positive(double x) {
  // valid for x >= 0.5
  const double z = x - 1.0;
  double a = kLanczos[0];
  const double t = z + kLanczosG + 0.5;
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (z + static_cast<double>(i));
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

// sin(pi x) with argument reduction so that it vanishes exactly at integers.
double sin_pi(double x) {
  const double n = std::round(2.0 * x);
  const double r = x - 0.5 * n;  // |r| <= 1/4
  const long q = static_cast<long>(n) & 3;
  const double s = std::sin(kPi * r);
  const double c = std::cos(kPi * r);
  switch (q) {
    case 0: return s;
    case 1: return c;
    case 2: return -s;
    default: return -c;
  }
}

// Ai(0) and -Ai'(0).
constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kAip0 = 0.258819403792806798405183560189203963L;

double airy_series(double u) {
  const long double x = u;
  const long double x3 = x * x * x;
  long double f_term = 1.0L;
  long double g_term = x;
  long double f = f_term;
  long double g = g_term;
  for (int k = 0; k < 400; ++k) {
    const long double k3 = 3.0L * k;
    f_term *= x3 / ((k3 + 2.0L) * (k3 + 3.0L));
    g_term *= x3 / ((k3 + 3.0L) * (k3 + 4.0L));
    f += f_term;
    g += g_term;
    if (std::fabs(f_term) <= 1e-21L * std::fabs(f) && std::fabs(g_term) <= 1e-21L * (std::fabs(g) + 1e-300L))
      break;
  }
  return static_cast<double>(kAi0 * f - kAip0 * g);
}

// Asymptotic coefficients u_k of the Airy expansions.
long double airy_coefficient_ratio(int k) {
  const long double kk = k;
  return (6.0L * kk - 5.0L) * (6.0L * kk - 3.0L) * (6.0L * kk - 1.0L) / ((2.0L * kk - 1.0L) * 216.0L * kk);
}

double airy_asymptotic_positive(double u) {
  const long double z = u;
  const long double zeta = 2.0L / 3.0L * z * std::sqrt(z);
  long double term = 1.0L;
  long double sum = 1.0L;
  long double prev = INFINITY;
  for (int k = 1; k < 200; ++k) {
    const long double next = -term * airy_coefficient_ratio(k) / zeta;
    if (std::fabs(next) >= std::fabs(prev) && k > 2) break;
    prev = next;
    term = next;
    sum += term;
    if (std::fabs(term) < 1e-20L) break;
  }
  const long double pre = std::exp(-zeta) / (2.0L * std::sqrt(std::numbers::pi_v<long double>) * std::pow(z, 0.25L));
  return static_cast<double>(pre * sum);
}

double airy_asymptotic_negative(double u) {
  const long double z = -static_cast<long double>(u);
  const long double zeta = 2.0L / 3.0L * z * std::sqrt(z);
  long double p = 1.0L;
  long double q = 0.0L;
  long double coeff = 1.0L;    // u_k
  long double zpow = 1.0L;     // zeta^{-k}
  long double prev = INFINITY;
  for (int k = 1; k < 400; ++k) {
    coeff *= airy_coefficient_ratio(k);
    zpow /= zeta;
    const long double term = coeff * zpow;
    if (term >= prev && k > 2) break;
    prev = term;
    // k even -> P with sign (-1)^{k/2}; k odd -> Q with sign (-1)^{(k-1)/2}
    const int half = k / 2;
    const long double sign = (half % 2 == 0) ? 1.0L : -1.0L;
    if (k % 2 == 0) p += sign * term;
    else q += sign * term;
    if (term < 1e-20L) break;
  }
  const long double phase = zeta + std::numbers::pi_v<long double> / 4.0L;
  const long double pre = 1.0L / (std::sqrt(std::numbers::pi_v<long double>) * std::pow(z, 0.25L));
  return static_cast<double>(pre * (std::sin(phase) * p - std::cos(phase) * q));
}

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw DomainError("special", "gamma_fn", "non-finite argument");
  if (x <= 0.0 && x == std::floor(x)) throw DomainError("special", "gamma_fn", "pole at nonpositive integer");
  if (x < 0.5) return kPi / (sin_pi(x) * gamma_positive(1.0 - x));
  return gamma_positive(x);
}

double airy_ai(double u) {
  if (!std::isfinite(u)) throw DomainError("special", "airy_ai", "non-finite argument");
  if (u > 6.0) return airy_asymptotic_positive(u);
  if (u < -8.0) return airy_asymptotic_negative(u);
  return airy_series(u);
}

double c1_constant(double alpha) {
  if (!(alpha > 0.5)) throw DomainError("special", "c1_constant", "alpha must exceed 1/2");
  return std::pow(2.0, -1.5) * gamma_fn(0.25) * gamma_fn(alpha / 2.0 - 0.25) / gamma_fn(alpha / 2.0);
}

namespace {
void check_c2_domain(int d, double alpha, const char* op) {
  if (d < 2) throw DomainError("special", op, "dimension must be at least 2");
  if (!(alpha > 0.5) || !(alpha < d - 0.5))
    throw DomainError("special", op, "alpha must lie in (1/2, d - 1/2)");
}
}  // namespace

std::complex<double> c2_constant(int d, double alpha) {
  check_c2_domain(d, alpha, "c2_constant");
  const double mag = std::pow(2.0 * kPi, (1.0 - d) / 2.0) * std::pow(2.0, (d - 1.0) / 2.0 - alpha) *
                     gamma_fn(0.25) * gamma_fn(d / 2.0 - 0.25 - alpha / 2.0) / gamma_fn(alpha / 2.0);
  return {0.0, -mag};
}

std::complex<double> c2_constant_chain(int d, double alpha) {
  check_c2_domain(d, alpha, "c2_constant_chain");
  // Fourier transform of |y|^{-a} on R^n, a = alpha - 1/2, n = d - 1:
  //   pi^{n/2} 2^{n-a} Gamma((n-a)/2)/Gamma(a/2) |k|^{a-n}
  // written with (2 pi)^{(d-1)/2} 2^{d/2-alpha}.
  const double fourier = std::pow(2.0 * kPi, (d - 1.0) / 2.0) * std::pow(2.0, d / 2.0 - alpha) *
                         gamma_fn((d - 0.5 - alpha) / 2.0) / gamma_fn((alpha - 0.5) / 2.0);
  return c1_constant(alpha) * std::pow(2.0 * kPi, 1.0 - d) * std::complex<double>(0.0, -2.0) * fourier;
}

}  // namespace stark::special
