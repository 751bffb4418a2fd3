#include "stark/classical.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stark/parabolic.hpp"

namespace stark::classical {

using potentials::PotentialSpec;
using LD = long double;

void check_point(const PhasePoint& p, const char* op) {
  if (p.y.size() != p.zeta.size() || p.y.empty())
    throw DomainError("classical", op, "y and zeta must have the same length d - 1 >= 1");
  bool finite = std::isfinite(p.x) && std::isfinite(p.eta);
  for (double v : p.y) finite = finite && std::isfinite(v);
  for (double v : p.zeta) finite = finite && std::isfinite(v);
  if (!finite) throw DomainError("classical", op, "non-finite phase point");
}

namespace {

template <class Real>
std::vector<Real> position(const BasicPhasePoint<Real>& p) {
  std::vector<Real> pos(p.y.size() + 1);
  pos[0] = p.x;
  std::copy(p.y.begin(), p.y.end(), pos.begin() + 1);
  return pos;
}

}  // namespace

template <class Real>
Real energy(const PotentialSpec& spec, const BasicPhasePoint<Real>& p) {
  Real kinetic = p.eta * p.eta;
  for (Real z : p.zeta) kinetic += z * z;
  const auto pos = position(p);
  return kinetic / 2 - p.x + potentials::eval_potential<Real>(spec, pos);
}

template double energy<double>(const PotentialSpec&, const PhasePoint&);
template long double energy<long double>(const PotentialSpec&, const ExtPhasePoint&);

PhasePoint free_flow(const PhasePoint& p0, double t) {
  PhasePoint p = p0;
  p.x = p0.x + t * p0.eta + 0.5 * t * t;
  for (std::size_t i = 0; i < p.y.size(); ++i) p.y[i] = p0.y[i] + t * p0.zeta[i];
  p.eta = p0.eta + t;
  return p;
}

double Trajectory::relative_energy_drift() const {
  if (energies.empty()) return 0.0;
  const LD h0 = energies.front();
  LD worst = 0;
  for (LD h : energies) worst = std::max(worst, std::abs(h - h0));
  return static_cast<double>(worst / std::max<LD>(1, std::abs(h0)));
}

void write_csv(std::ostream& out, const Trajectory& traj) {
  const int d = traj.dim();
  out << "t,x";
  for (int i = 1; i < d; ++i) out << ",y_" << i;
  out << ",eta";
  for (int i = 1; i < d; ++i) out << ",zeta_" << i;
  out << ",energy\n";
  char buf[40];
  auto put = [&](LD v, bool last = false) {
    std::snprintf(buf, sizeof buf, "%.17g", static_cast<double>(v));
    out << buf << (last ? '\n' : ',');
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& p = traj.points[k];
    put(traj.times[k]);
    put(p.x);
    for (LD v : p.y) put(v);
    put(p.eta);
    for (LD v : p.zeta) put(v);
    put(traj.energies[k], true);
  }
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr LD a21 = 1.0L / 5;
constexpr LD a31 = 3.0L / 40, a32 = 9.0L / 40;
constexpr LD a41 = 44.0L / 45, a42 = -56.0L / 15, a43 = 32.0L / 9;
constexpr LD a51 = 19372.0L / 6561, a52 = -25360.0L / 2187, a53 = 64448.0L / 6561, a54 = -212.0L / 729;
constexpr LD a61 = 9017.0L / 3168, a62 = -355.0L / 33, a63 = 46732.0L / 5247, a64 = 49.0L / 176,
             a65 = -5103.0L / 18656;
constexpr LD b1 = 35.0L / 384, b3 = 500.0L / 1113, b4 = 125.0L / 192, b5 = -2187.0L / 6784, b6 = 11.0L / 84;
constexpr LD e1 = 71.0L / 57600, e3 = -71.0L / 16695, e4 = 71.0L / 1920, e5 = -17253.0L / 339200,
             e6 = 22.0L / 525, e7 = -1.0L / 40;

// State layout: [x, y_1..y_{d-1}, eta, zeta_1..zeta_{d-1}].
class Stepper {
 public:
  Stepper(const PotentialSpec& spec, const PhasePoint& p0, LD direction, LD tol)
      : spec_(spec), d_(p0.dim()), dir_(direction), tol_(tol), state_(2 * d_), grad_(d_) {
    state_[0] = p0.x;
    state_[d_] = p0.eta;
    for (int i = 1; i < d_; ++i) {
      state_[i] = p0.y[i - 1];
      state_[d_ + i] = p0.zeta[i - 1];
    }
    for (auto& k : k_) k.resize(2 * d_);
    tmp_.resize(2 * d_);
    next_.resize(2 * d_);
    rhs(state_, k_[0]);
    h_ = dir_ * std::min<LD>(1e-2L, std::sqrt(tol_) * 10);
  }

  LD time() const { return t_; }
  LD eta() const { return state_[d_]; }
  LD x() const { return state_[0]; }
  std::size_t steps() const { return steps_; }

  ExtPhasePoint point() const {
    ExtPhasePoint p;
    p.x = state_[0];
    p.eta = state_[d_];
    p.y.assign(state_.begin() + 1, state_.begin() + d_);
    p.zeta.assign(state_.begin() + d_ + 1, state_.end());
    return p;
  }

  // One attempted step that does not pass `target`. Returns true if accepted.
  bool attempt(LD target) {
    LD h = h_;
    bool clipped = false;
    if (dir_ * (t_ + h - target) >= 0) {
      h = target - t_;
      clipped = true;
    }
    const int n = 2 * d_;
    auto stage = [&](std::vector<LD>& out, std::initializer_list<std::pair<int, LD>> terms) {
      for (int i = 0; i < n; ++i) {
        LD acc = 0;
        for (auto [j, a] : terms) acc += a * k_[j][i];
        tmp_[i] = state_[i] + h * acc;
      }
      rhs(tmp_, out);
    };
    stage(k_[1], {{0, a21}});
    stage(k_[2], {{0, a31}, {1, a32}});
    stage(k_[3], {{0, a41}, {1, a42}, {2, a43}});
    stage(k_[4], {{0, a51}, {1, a52}, {2, a53}, {3, a54}});
    stage(k_[5], {{0, a61}, {1, a62}, {2, a63}, {3, a64}, {4, a65}});
    for (int i = 0; i < n; ++i)
      next_[i] = state_[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] + b5 * k_[4][i] + b6 * k_[5][i]);
    rhs(next_, k_[6]);
    LD err = 0;
    for (int i = 0; i < n; ++i) {
      const LD e = h * (e1 * k_[0][i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] + e6 * k_[5][i] +
                        e7 * k_[6][i]);
      err = std::max(err, std::abs(e) / tol_);
    }
    const LD factor = err > 0 ? std::clamp<LD>(0.9L * std::pow(err, -0.2L), 0.2L, 5.0L) : 5.0L;
    if (err <= 1) {
      t_ = clipped ? target : t_ + h;
      state_.swap(next_);
      k_[0].swap(k_[6]);
      ++steps_;
      // a short clipped step says nothing about the natural step size
      if (!clipped || std::abs(h * factor) > std::abs(h_)) h_ = h * factor;
      return true;
    }
    h_ = h * factor;
    if (std::abs(h_) < 1e-13L * std::max<LD>(1, std::abs(t_)))
      throw BudgetError("classical", "integrate_orbit", "min_step", "step size underflow");
    return false;
  }

 private:
  void rhs(const std::vector<LD>& s, std::vector<LD>& out) {
    potentials::grad_potential<LD>(spec_, std::span<const LD>(s.data(), d_), grad_);
    for (int i = 0; i < d_; ++i) out[i] = s[d_ + i];
    out[d_] = 1 - grad_[0];
    for (int i = 1; i < d_; ++i) out[d_ + i] = -grad_[i];
  }

  const PotentialSpec& spec_;
  int d_;
  LD dir_;
  LD tol_;
  LD t_ = 0;
  LD h_;
  std::size_t steps_ = 0;
  std::vector<LD> state_;
  std::vector<LD> grad_;
  std::vector<LD> k_[7];
  std::vector<LD> tmp_, next_;
};

void record(Trajectory& traj, const PotentialSpec& spec, const Stepper& s) {
  traj.times.push_back(s.time());
  traj.points.push_back(s.point());
  traj.energies.push_back(energy<LD>(spec, traj.points.back()));
}

}  // namespace

Trajectory integrate_orbit(const PotentialSpec& spec, const PhasePoint& p0, double t_final,
                           const OrbitOptions& options) {
  check_point(p0, "integrate_orbit");
  if (!(options.tol > 0)) throw ConfigError("classical", "integrate_orbit", "tol must be positive");
  if (!std::isfinite(t_final)) throw DomainError("classical", "integrate_orbit", "t_final must be finite");
  const LD dir = t_final >= 0 ? 1 : -1;
  for (std::size_t i = 0; i < options.samples.size(); ++i) {
    const double s = options.samples[i];
    const bool inside = dir * s >= 0 && dir * (s - t_final) <= 0;
    const bool monotone = i == 0 || dir * (s - options.samples[i - 1]) > 0;
    if (!inside || !monotone)
      throw ConfigError("classical", "integrate_orbit", "sample times must be monotone within [0, t_final]");
  }

  Trajectory traj;
  const bool every_step = options.samples.empty();
  std::size_t next = 0;
  try {
    Stepper stepper(spec, p0, dir, options.tol);
    if (every_step || options.samples[0] == 0.0) {
      record(traj, spec, stepper);
      if (!every_step) ++next;
    }
    while (dir * (static_cast<LD>(t_final) - stepper.time()) > 0) {
      if (stepper.steps() >= options.max_steps)
        throw BudgetError("classical", "integrate_orbit", "max_steps", "step budget exhausted");
      const LD target = every_step || next >= options.samples.size() ? static_cast<LD>(t_final)
                                                                      : static_cast<LD>(options.samples[next]);
      if (!stepper.attempt(target)) continue;
      if (every_step) {
        record(traj, spec, stepper);
      } else if (next < options.samples.size() && stepper.time() == target) {
        record(traj, spec, stepper);
        ++next;
      }
      traj.steps = stepper.steps();
    }
  } catch (const BudgetError&) {
    throw;
  } catch (const DomainError& e) {
    throw IntegrationError(e.what(), std::move(traj));
  }
  return traj;
}

std::vector<double> log_spaced_times(double t_lo, double t_hi, int per_octave) {
  if (!(t_lo > 0) || !(t_hi >= t_lo) || per_octave < 1)
    throw ConfigError("classical", "log_spaced_times", "need 0 < t_lo <= t_hi and per_octave >= 1");
  const double octaves = std::log2(t_hi / t_lo);
  const int n = static_cast<int>(std::ceil(octaves * per_octave - 1e-9));
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(t_lo * std::exp2(static_cast<double>(k) / per_octave));
  out.push_back(t_hi);
  return out;
}

MomentumLimit asymptotic_momentum(const PotentialSpec& spec, const PhasePoint& p0, int sign,
                                  const MomentumOptions& options) {
  check_point(p0, "asymptotic_momentum");
  if (sign == 0) throw ConfigError("classical", "asymptotic_momentum", "sign must be +1 or -1");
  if (sign < 0) {
    // time reversal: zeta_minus(x, y, eta, zeta) = -zeta_plus(x, y, -eta, -zeta)
    PhasePoint reversed = p0;
    reversed.eta = -p0.eta;
    for (double& z : reversed.zeta) z = -z;
    MomentumLimit lim = asymptotic_momentum(spec, reversed, 1, options);
    for (double& z : lim.zeta) z = -z;
    for (auto& row : lim.zeta_at)
      for (double& z : row) z = -z;
    return lim;
  }

  Stepper stepper(spec, p0, 1, options.tol);
  const LD t_max = options.t_max;
  auto guard = [&](LD target) {
    while (stepper.time() < target) {
      if (stepper.time() >= t_max)
        throw BudgetError("classical", "asymptotic_momentum", "t_max", "no convergence within the time budget");
      stepper.attempt(std::min(target, t_max));
    }
  };

  // escape: x beyond the threshold with eta > 0 and increasing over consecutive steps
  int streak = 0;
  LD last_eta = stepper.eta();
  while (streak < options.escape_steps) {
    if (stepper.time() >= t_max)
      throw BudgetError("classical", "asymptotic_momentum", "t_max", "orbit did not escape within the time budget");
    if (!stepper.attempt(t_max)) continue;
    const LD eta = stepper.eta();
    streak = stepper.x() > options.x_escape && eta > 0 && eta > last_eta ? streak + 1 : 0;
    last_eta = eta;
  }

  MomentumLimit lim;
  const int n = p0.dim() - 1;
  const double rate = std::exp2(2 * spec.delta) - 1;
  std::vector<double> previous;
  double T = std::max<double>(options.t_start, 2 * static_cast<double>(stepper.time()));
  for (;;) {
    if (T > options.t_max)
      throw BudgetError("classical", "asymptotic_momentum", "t_max", "no convergence within the time budget");
    guard(T);
    const auto p = stepper.point();
    lim.horizons.push_back(T);
    lim.zeta_at.emplace_back(p.zeta.begin(), p.zeta.end());
    const std::size_t k = lim.zeta_at.size();
    if (k >= 2) {
      std::vector<double> extrapolated(n);
      for (int i = 0; i < n; ++i) {
        const double z1 = lim.zeta_at[k - 1][i], z0 = lim.zeta_at[k - 2][i];
        extrapolated[i] = z1 + (z1 - z0) / rate;
      }
      if (!previous.empty()) {
        double err = 0, scale = 1;
        for (int i = 0; i < n; ++i) {
          err = std::max(err, std::abs(extrapolated[i] - previous[i]));
          scale = std::max(scale, std::abs(extrapolated[i]));
        }
        if (err <= options.target * scale) {
          lim.zeta = extrapolated;
          lim.error = err;
          lim.horizon = T;
          return lim;
        }
      }
      previous = extrapolated;
    }
    T *= 2;
  }
}

template <class Real>
BasicGammaObservables<Real> gamma_observables(const BasicPhasePoint<Real>& p, Real lambda) {
  const Real x = p.x + lambda;
  const Real y2 = parabolic::norm_squared<Real>(p.y);
  const Real C = static_cast<Real>(kGammaDomainC);
  if (p.y.size() != p.zeta.size() || !(x > C) || !(y2 * C * C < x * x))
    throw DomainError("classical", "gamma_observables", "point outside x > C, |y|/x < 1/C");
  const std::size_t d = p.y.size() + 1;
  std::vector<Real> grad(d), gf(d);
  parabolic::theta1_gradient<Real>(x, p.y, grad);
  parabolic::f_gradient<Real>(x, p.y, gf);
  const Real f2 = parabolic::r_plus_x<Real>(x, p.y);

  BasicGammaObservables<Real> out;
  out.gamma.resize(d);
  out.gamma[0] = p.eta - grad[0];
  for (std::size_t i = 1; i < d; ++i) out.gamma[i] = p.zeta[i - 1] - grad[i];
  out.gamma_tilde.resize(d - 1);
  for (std::size_t i = 0; i + 1 < d; ++i) out.gamma_tilde[i] = p.y[i] / f2;
  Real dot = 0, gf2 = 0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += gf[i] * out.gamma[i];
    gf2 += gf[i] * gf[i];
  }
  out.gamma_par = dot / gf2;
  out.Gamma_norm = std::sqrt(parabolic::norm_squared<Real>(out.gamma) + parabolic::norm_squared<Real>(out.gamma_tilde));
  return out;
}

template BasicGammaObservables<double> gamma_observables<double>(const PhasePoint&, double);
template BasicGammaObservables<long double> gamma_observables<long double>(const ExtPhasePoint&, long double);

DecayFit decay_slope(const Trajectory& traj, Observable which, double t_lo, double t_hi, double lambda) {
  if (!(t_lo > 0) || !(t_hi > t_lo)) throw ConfigError("classical", "decay_slope", "window must satisfy 0 < t_lo < t_hi");
  for (std::size_t i = 1; i < traj.size(); ++i)
    if (!(traj.times[i] > traj.times[i - 1]))
      throw DomainError("classical", "decay_slope", "trajectory times must increase");
  if (traj.size() == 0 || traj.times.front() > t_lo || traj.times.back() < t_hi)
    throw DomainError("classical", "decay_slope", "trajectory does not cover the window");

  std::vector<std::size_t> picks;
  for (double target : log_spaced_times(t_lo, t_hi, 4)) {
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), static_cast<LD>(target));
    std::size_t k = static_cast<std::size_t>(it - traj.times.begin());
    if (k > 0 && (k == traj.size() || std::log(traj.times[k] / target) > std::log(target / traj.times[k - 1]))) --k;
    if (traj.times[k] < t_lo || traj.times[k] > t_hi) continue;
    if (picks.empty() || picks.back() != k) picks.push_back(k);
  }

  std::vector<double> ts, values;
  for (std::size_t k : picks) {
    const auto obs = gamma_observables<LD>(traj.points[k], static_cast<LD>(lambda));
    const LD v = which == Observable::Gamma_norm ? obs.Gamma_norm : obs.gamma_par;
    if (v == 0 || !std::isfinite(static_cast<double>(v))) continue;
    ts.push_back(static_cast<double>(traj.times[k]));
    values.push_back(static_cast<double>(v));
  }
  if (ts.size() < 8) throw DomainError("classical", "decay_slope", "fewer than 8 usable samples");
  return DecayFit{fit_power_law(ts, values)};
}

double japanese(std::span<const double> y, double m) { return std::sqrt(m * m + parabolic::norm_squared(y)); }

double region_parameter(const PhasePoint& p, double m) {
  const double jy = japanese(p.y, m);
  if (!(p.x + jy > 0)) throw DomainError("classical", "region_parameter", "requires x + <y>_m > 0");
  double radial = p.eta;
  for (std::size_t i = 0; i < p.y.size(); ++i) radial += p.y[i] / jy * p.zeta[i];
  return radial / std::sqrt(2 * p.x + 2 * jy);
}

bool in_region_X(const PhasePoint& p, double m, double eps, int sign) {
  const double jy = japanese(p.y, m);
  if (!(p.x + jy > 0)) return false;
  double radial = p.eta;
  for (std::size_t i = 0; i < p.y.size(); ++i) radial += p.y[i] / jy * p.zeta[i];
  const double s = sign >= 0 ? 1.0 : -1.0;
  return s * radial > -eps * std::sqrt(2 * p.x + 2 * jy);
}

}  // namespace stark::classical
