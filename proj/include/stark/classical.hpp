#pragma once

// Classical Stark dynamics h = (eta^2 + |zeta|^2)/2 - x + q(x, y).
// Orbits are integrated in long double: the Gamma observables at t ~ 1e4 are
// differences of O(t) momenta that must resolve O(t^-2) remainders.

#include <cstddef>
#include <memory>
#include <ostream>
#include <span>
#include <vector>

#include "stark/error.hpp"
#include "stark/fit.hpp"
#include "stark/potentials.hpp"

namespace stark::classical {

template <class Real>
struct BasicPhasePoint {
  Real x = 0;
  std::vector<Real> y;
  Real eta = 0;
  std::vector<Real> zeta;

  int dim() const { return static_cast<int>(y.size()) + 1; }

  template <class Other>
  BasicPhasePoint<Other> as() const {
    return {static_cast<Other>(x), std::vector<Other>(y.begin(), y.end()), static_cast<Other>(eta),
            std::vector<Other>(zeta.begin(), zeta.end())};
  }
};

using PhasePoint = BasicPhasePoint<double>;
using ExtPhasePoint = BasicPhasePoint<long double>;

/// Throws DomainError if a component is non-finite or y and zeta differ in length.
void check_point(const PhasePoint& p, const char* op);

template <class Real>
Real energy(const potentials::PotentialSpec& spec, const BasicPhasePoint<Real>& p);

/// Closed-form free flow (q = 0).
PhasePoint free_flow(const PhasePoint& p0, double t);

struct Trajectory {
  std::vector<long double> times;
  std::vector<ExtPhasePoint> points;
  std::vector<long double> energies;
  std::size_t steps = 0;  ///< accepted integrator steps

  std::size_t size() const { return times.size(); }
  int dim() const { return points.empty() ? 0 : points.front().dim(); }
  /// max_i |h_i - h_0| / max(1, |h_0|)
  double relative_energy_drift() const;
};

/// CSV with header t,x,y_1..,eta,zeta_1..,energy and 17 significant digits.
void write_csv(std::ostream& out, const Trajectory& traj);

/// Raised when the orbit leaves the domain of the potential (exclusion ball).
/// The trajectory up to the last accepted step is attached.
class IntegrationError : public DomainError {
 public:
  IntegrationError(const std::string& what, Trajectory partial)
      : DomainError("classical", "integrate_orbit", what),
        partial_(std::make_shared<Trajectory>(std::move(partial))) {}
  const Trajectory& partial() const { return *partial_; }

 private:
  std::shared_ptr<const Trajectory> partial_;
};

struct OrbitOptions {
  double tol = 1e-10;        ///< absolute local error per step
  std::vector<double> samples;  ///< output times (monotone towards t_final); empty records every step
  std::size_t max_steps = 20'000'000;
};

/// Dormand-Prince 5(4) in long double. t_final may be negative (backward flow).
Trajectory integrate_orbit(const potentials::PotentialSpec& spec, const PhasePoint& p0, double t_final,
                           const OrbitOptions& options = {});

/// n times per octave between t_lo and t_hi inclusive, log-uniform.
std::vector<double> log_spaced_times(double t_lo, double t_hi, int per_octave);

struct MomentumLimit {
  std::vector<double> zeta;     ///< extrapolated zeta_plus or zeta_minus
  double error = 0.0;           ///< max-norm change of the extrapolant between the last two horizons
  double horizon = 0.0;         ///< final integration time |T|
  std::vector<double> horizons;           ///< T_k
  std::vector<std::vector<double>> zeta_at;  ///< zeta(T_k)
};

struct MomentumOptions {
  double tol = 1e-12;         ///< integrator tolerance
  double target = 1e-9;       ///< required extrapolation error
  double t_start = 64.0;      ///< first horizon after escape
  double t_max = 1e7;         ///< budget
  double x_escape = 100.0;
  int escape_steps = 10;
};

/// zeta_plus (sign > 0) or zeta_minus (sign < 0) by doubling horizons and
/// Richardson extrapolation assuming an error ~ T^{-2 delta}. Non-escaping
/// orbits and unconverged limits raise BudgetError("t_max").
MomentumLimit asymptotic_momentum(const potentials::PotentialSpec& spec, const PhasePoint& p0, int sign,
                                  const MomentumOptions& options = {});

/// Domain constant for the Gamma observables: x > C and |y|/x < 1/C.
inline constexpr double kGammaDomainC = 10.0;

template <class Real>
struct BasicGammaObservables {
  std::vector<Real> gamma;        ///< (eta, zeta) - grad theta1
  std::vector<Real> gamma_tilde;  ///< y / f^2
  Real gamma_par = 0;             ///< grad f . gamma / |grad f|^2
  Real Gamma_norm = 0;            ///< |(gamma, gamma_tilde)|
};
using GammaObservables = BasicGammaObservables<double>;

/// Evaluated at (x + lambda, y): lambda shifts the zero-energy shell to energy lambda.
template <class Real>
BasicGammaObservables<Real> gamma_observables(const BasicPhasePoint<Real>& p, Real lambda = 0);

enum class Observable { Gamma_norm, gamma_par };

struct DecayFit {
  LineFit fit;
  double slope() const { return fit.slope; }
  double half_width() const { return fit.half_width(); }
};

/// Log-log slope of |observable| over the trajectory samples in [t_lo, t_hi],
/// subsampled to at most four per octave. Zero observables are dropped; fewer
/// than 8 usable samples is a DomainError.
DecayFit decay_slope(const Trajectory& traj, Observable which, double t_lo, double t_hi, double lambda = 0.0);

/// <y>_m = (m^2 + |y|^2)^{1/2}
double japanese(std::span<const double> y, double m);

/// a = (eta + yhat_m . zeta) / sqrt(2x + 2<y>_m); requires x + <y>_m > 0.
double region_parameter(const PhasePoint& p, double m);

bool in_region_X(const PhasePoint& p, double m, double eps, int sign);

}  // namespace stark::classical
