#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "stark/spline.hpp"

namespace stark::potentials {

enum class PotentialKind { zero, homogeneous, coulomb, table };

std::string to_string(PotentialKind kind);
PotentialKind kind_from_string(const std::string& name);

/// Radially symmetric samples q(r_i). Interpolated by a natural cubic spline,
/// held constant below the first sample and continued beyond the last one by
/// (R/r)^p (a + b R/r), p = (1+2 delta)/2, matched in value and slope.
class RadialTable {
 public:
  RadialTable() = default;
  /// Throws ConfigError unless there are >= 4 samples with strictly increasing r >= 0.
  RadialTable(std::vector<double> r, std::vector<double> value);

  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& value() const { return value_; }
  bool empty() const { return r_.empty(); }
  double interpolate(double r) const;
  /// d/dr of interpolate (zero below the first sample).
  double derivative(double r) const;

 private:
  std::vector<double> r_;
  std::vector<double> value_;
  std::shared_ptr<const CubicSpline<double>> spline_;
};

/// Short-range Stark potential q = q1 (the compactly supported part is zero).
/// Evaluated as  kappa (r^2 + softening^2)^{-alpha/2}  for the power-law kinds.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::zero;
  double kappa = 0.0;
  double alpha = 1.0;
  double delta = 0.5;             ///< decay parameter in (0, 1/2]
  double softening = 0.0;         ///< regularization length near the origin
  double exclusion_radius = 0.0;  ///< with zero softening, |point| <= radius is rejected
  RadialTable table;

  static PotentialSpec zero();
  static PotentialSpec coulomb(double kappa, double softening = 1e-3);
  /// delta defaults to the largest admissible value min(1/2, alpha - 1/2).
  static PotentialSpec homogeneous(double kappa, double alpha, double softening = 0.0);
  static PotentialSpec tabulated(RadialTable table, double delta, double softening = 0.0);

  /// Same spec with softening removed (the exact power law).
  PotentialSpec unsoftened() const;
};

/// Throws ConfigError when the spec violates its invariants in dimension d.
void validate(const PotentialSpec& spec, int d);

/// q at point = (x, y_2, ..., y_d). Real is double or long double.
template <class Real>
Real eval_potential(const PotentialSpec& spec, std::span<const Real> point);

/// grad q at point, written to out (same length as point).
template <class Real>
void grad_potential(const PotentialSpec& spec, std::span<const Real> point, std::span<Real> out);

inline double eval_potential(const PotentialSpec& spec, std::span<const double> point) {
  return eval_potential<double>(spec, point);
}

std::vector<double> grad_potential(const PotentialSpec& spec, std::span<const double> point);

}  // namespace stark::potentials
