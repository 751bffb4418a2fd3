#include "stark/cli.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "stark/classical.hpp"
#include "stark/error.hpp"
#include "stark/fit.hpp"
#include "stark/kernel.hpp"
#include "stark/oscillatory.hpp"
#include "stark/parabolic.hpp"
#include "stark/parallel.hpp"
#include "stark/quadrature.hpp"
#include "stark/special.hpp"
#include "stark/transport.hpp"

namespace stark::cli {

using nlohmann::json;
using classical::PhasePoint;
using potentials::PotentialKind;
using potentials::PotentialSpec;
using Complex = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

constexpr const char* kDefaults = R"({
  "dimension": 3,
  "seed": 1,
  "workers": 0,
  "output_dir": "stark_out",
  "potential": {
    "kind": "coulomb",
    "kappa": 1.0,
    "alpha": 1.0,
    "delta": 0.5,
    "softening": 0.001,
    "exclusion_radius": 0.0,
    "r": [],
    "q": []
  },
  "region": {"m": 1.0, "eps": 0.3},
  "tolerances": {
    "orbit": 1e-10,
    "momenta": 1e-9,
    "transport": 1e-10,
    "born": 1e-10,
    "eigenfunction": 1e-10,
    "identity": 1e-10
  },
  "orbit": {
    "x": 30.0, "y": [], "eta": null, "zeta": [], "energy": 0.0,
    "t_final": 1000.0, "samples": 201, "max_steps": 20000000
  },
  "momenta": {
    "samples": 8, "x_range": [20.0, 50.0], "y_max": 2.0, "zeta_max": 0.5,
    "integrator_tol": 1e-12, "t_max": 1e7
  },
  "eikonal": {"points": 10000, "x_range": [10.0, 1e6], "y_over_x": 0.1},
  "transport": {
    "points": 10, "k_max": 2, "h_scale": 0.05, "refinements": 3, "t_max": 1e5,
    "ray_x": [100.0, 215.44, 464.16, 1000.0, 2154.4, 4641.6, 10000.0],
    "ray_c": [], "ray_zeta": []
  },
  "born": {"lambda": 0.0, "zeta": [], "R": 0.0, "y_range": [10.0, 1e5], "points": 13},
  "kernel": {
    "nodes": 2048, "extent": 5e4, "radial_knots": 600, "taper": 0.2,
    "k_lo": 0.0, "k_hi": 0.0, "bins": 16, "lambda": 0.0, "zeta": [], "R": 0.0
  },
  "airy": {
    "dimension": 2, "lambda": 0.0, "y_over_x": 0.05,
    "x": [50.0, 100.0, 200.0, 400.0, 800.0],
    "xi_center": [2.0], "xi_width": 2.5
  },
  "verify": {
    "eikonal_points": 10000, "parabolic_points": 10000, "region_points": 10000,
    "decay_orbits": 20, "decay_window": [100.0, 10000.0], "kernel": true
  }
})";

[[noreturn]] void config_error(const std::string& op, const std::string& what) { throw ConfigError("cli", op, what); }

std::string type_name(const json& v) {
  if (v.is_number()) return "number";
  return v.type_name();
}

bool compatible(const json& def, const json& v) {
  if (def.is_null()) return v.is_null() || v.is_number();
  if (def.is_number()) return v.is_number();
  if (def.is_array()) {
    if (!v.is_array()) return false;
    return std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
  }
  return def.type() == v.type();
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
  return parts;
}

const json& node(const json& doc, const std::string& path) {
  const json* cur = &doc;
  for (const auto& key : split_path(path)) {
    if (!cur->is_object() || !cur->contains(key)) config_error("read", "missing key " + path);
    cur = &(*cur)[key];
  }
  return *cur;
}

double number(const json& doc, const std::string& path) { return node(doc, path).get<double>(); }

double positive(const json& doc, const std::string& path) {
  const double v = number(doc, path);
  if (!(v > 0) || !std::isfinite(v)) config_error("validate", path + " must be positive");
  return v;
}

long long integer(const json& doc, const std::string& path, long long lo, long long hi) {
  const json& n = node(doc, path);
  const double v = n.get<double>();
  if (v != std::floor(v) || v < static_cast<double>(lo) || v > static_cast<double>(hi))
    config_error("validate", path + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<long long>(v);
}

std::vector<double> numbers(const json& doc, const std::string& path) {
  std::vector<double> out;
  for (const auto& e : node(doc, path)) out.push_back(e.get<double>());
  return out;
}

// Array of length n; empty selects `fill` in the first slot and zeros elsewhere.
std::vector<double> vector_of(const json& doc, const std::string& path, std::size_t n, double fill = 0.0) {
  auto v = numbers(doc, path);
  if (v.empty()) {
    v.assign(n, 0.0);
    if (n > 0) v[0] = fill;
  }
  if (v.size() != n) config_error("validate", path + " must have " + std::to_string(n) + " entries");
  return v;
}

std::pair<double, double> range(const json& doc, const std::string& path) {
  const auto v = numbers(doc, path);
  if (v.size() != 2 || !(v[0] > 0) || !(v[1] > v[0])) config_error("validate", path + " must be [lo, hi] with 0 < lo < hi");
  return {v[0], v[1]};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cli", "write", "cannot open " + path.string());
    line(header);
  }
  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(fmt(v));
    line(cells);
  }
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::vector<std::string> indexed(const std::string& name, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(name + "_" + std::to_string(i));
  return out;
}

template <class... Parts>
std::vector<std::string> header(Parts&&... parts) {
  std::vector<std::string> out;
  auto add = [&](auto&& p) {
    if constexpr (std::is_convertible_v<decltype(p), std::string>)
      out.push_back(p);
    else
      out.insert(out.end(), p.begin(), p.end());
  };
  (add(parts), ...);
  return out;
}

double sq_norm(std::span<const double> v) {
  double s = 0;
  for (double e : v) s += e * e;
  return s;
}

double point_distance(const PhasePoint& a, const PhasePoint& b) {
  double m = std::max(std::abs(a.x - b.x), std::abs(a.eta - b.eta));
  for (std::size_t i = 0; i < a.y.size(); ++i)
    m = std::max({m, std::abs(a.y[i] - b.y[i]), std::abs(a.zeta[i] - b.zeta[i])});
  return m;
}

// Zero-energy scattering initial condition moving outward.
PhasePoint zero_energy_point(std::mt19937_64& rng, const PotentialSpec& spec, int d, double x_lo, double x_hi,
                             double y_max, double zeta_max) {
  std::uniform_real_distribution<double> ux(x_lo, x_hi), uy(-y_max, y_max), uz(-zeta_max, zeta_max);
  PhasePoint p;
  p.x = ux(rng);
  std::vector<double> pos{p.x};
  for (int i = 1; i < d; ++i) {
    p.y.push_back(uy(rng));
    p.zeta.push_back(uz(rng));
    pos.push_back(p.y.back());
  }
  const double e2 = 2 * (p.x - potentials::eval_potential(spec, pos)) - sq_norm(p.zeta);
  if (!(e2 > 0)) throw DomainError("cli", "sample", "initial point is not in the classically allowed region");
  p.eta = std::sqrt(e2);
  return p;
}

// Point of X+_eps with x in [50, 500] and region parameter in [0.2, 1.2].
PhasePoint outgoing_point(std::mt19937_64& rng, int d, double m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PhasePoint p;
  p.x = 50 + 450 * u(rng);
  for (int i = 1; i < d; ++i) {
    p.y.push_back((u(rng) - 0.5) * p.x / d);
    p.zeta.push_back(2 * u(rng) - 1);
  }
  const double jy = classical::japanese(p.y, m);
  const double a = 0.2 + u(rng);
  double radial = 0;
  for (int i = 0; i + 1 < d; ++i) radial += p.y[i] / jy * p.zeta[i];
  p.eta = a * std::sqrt(2 * p.x + 2 * jy) - radial;
  return p;
}

// x log-uniform on [lo, hi], y in a random direction with |y| <= ratio x.
std::vector<double> eikonal_point(std::mt19937_64& rng, int d, double lo, double hi, double ratio) {
  std::uniform_real_distribution<double> logx(std::log(lo), std::log(hi)), u(0.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<double> p(d);
  p[0] = std::exp(logx(rng));
  double n2 = 0;
  for (int i = 1; i < d; ++i) {
    p[i] = g(rng);
    n2 += p[i] * p[i];
  }
  const double scale = n2 > 0 ? u(rng) * ratio * p[0] / std::sqrt(n2) : 0.0;
  for (int i = 1; i < d; ++i) p[i] *= scale;
  return p;
}

// Point with r + x > 2.5 and coordinates in [-200, 200].
std::vector<double> identity_point(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> coord(-200.0, 200.0);
  for (;;) {
    std::vector<double> p(d);
    for (double& c : p) c = coord(rng);
    if (parabolic::r_plus_x<double>(p[0], std::span<const double>(p).subspan(1)) > 2.5) return p;
  }
}

// |grad theta1|^2 / 2 - x, evaluated in extended precision so that the
// rounding of x itself (ulp 1e-10 near 1e6) does not dominate.
double eikonal_residual(const std::vector<double>& p) {
  const std::vector<long double> q(p.begin(), p.end());
  std::vector<long double> g(q.size());
  parabolic::theta1_gradient<long double>(q[0], std::span<const long double>(q).subspan(1), g);
  return static_cast<double>(0.5L * parabolic::norm_squared<long double>(g) - q[0]);
}

double determinant(std::vector<double> a, int n) {
  double det = 1;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    if (a[piv * n + c] == 0) return 0;
    if (piv != c) {
      for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      det = -det;
    }
    det *= a[c * n + c];
    for (int r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (int k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
    }
  }
  return det;
}

struct Check {
  std::string suite, name, relation;
  double value = 0, bound = 0;
  bool pass = false;
};

class Checks {
 public:
  void at_most(const std::string& suite, const std::string& name, double value, double bound) {
    list.push_back({suite, name, "<=", value, bound, value <= bound});
  }
  void equal(const std::string& suite, const std::string& name, double value, double expected) {
    list.push_back({suite, name, "==", value, expected, value == expected});
  }
  std::vector<Check> list;
};

struct Context {
  const RunConfig& config;
  const json& doc;
  int d;
  std::filesystem::path dir;
  json summary;
  std::vector<std::string> artifacts;

  std::filesystem::path artifact(const std::string& name) {
    artifacts.push_back(name);
    return dir / name;
  }
  std::mt19937_64 rng(std::uint64_t stream) const {
    std::seed_seq seq{static_cast<std::uint64_t>(doc["seed"].get<double>()), stream};
    return std::mt19937_64(seq);
  }
  double tol(const std::string& name) const { return number(doc, "tolerances." + name); }
};

transport::TransportOptions transport_options(const Context& c) {
  transport::TransportOptions o;
  o.m = positive(c.doc, "region.m");
  o.eps = positive(c.doc, "region.eps");
  o.k_max = static_cast<int>(integer(c.doc, "transport.k_max", 1, 8));
  o.t_max = positive(c.doc, "transport.t_max");
  o.tol = c.tol("transport");
  return o;
}

bool has_power_law(const PotentialSpec& spec) {
  return spec.kind == PotentialKind::coulomb || spec.kind == PotentialKind::homogeneous;
}

// ---------------------------------------------------------------- subcommands

void run_orbit(Context& c) {
  const auto spec = c.config.potential();
  const int n = c.d - 1;
  PhasePoint p0;
  p0.x = number(c.doc, "orbit.x");
  p0.y = vector_of(c.doc, "orbit.y", n);
  p0.zeta = vector_of(c.doc, "orbit.zeta", n);
  const json& eta = node(c.doc, "orbit.eta");
  if (eta.is_null()) {
    std::vector<double> pos{p0.x};
    pos.insert(pos.end(), p0.y.begin(), p0.y.end());
    const double e2 = 2 * (number(c.doc, "orbit.energy") + p0.x - potentials::eval_potential(spec, pos)) -
                      sq_norm(p0.zeta);
    if (!(e2 > 0)) config_error("orbit", "no outgoing momentum at this energy; set orbit.eta");
    p0.eta = std::sqrt(e2);
  } else {
    p0.eta = eta.get<double>();
  }
  const double t_final = number(c.doc, "orbit.t_final");
  if (t_final == 0 || !std::isfinite(t_final)) config_error("orbit", "orbit.t_final must be nonzero");
  const auto samples = integer(c.doc, "orbit.samples", 2, 10'000'000);
  classical::OrbitOptions opt;
  opt.tol = c.tol("orbit");
  opt.max_steps = static_cast<std::size_t>(integer(c.doc, "orbit.max_steps", 1, 1LL << 40));
  for (long long i = 0; i < samples; ++i) opt.samples.push_back(t_final * i / (samples - 1));
  const auto traj = classical::integrate_orbit(spec, p0, t_final, opt);

  std::ofstream out(c.artifact("orbit.csv"), std::ios::binary);
  classical::write_csv(out, traj);
  double deviation = 0;
  for (std::size_t k = 0; k < traj.size(); ++k)
    deviation = std::max(deviation, point_distance(traj.points[k].as<double>(),
                                                   classical::free_flow(p0, static_cast<double>(traj.times[k]))));
  const auto end = traj.points.back().as<double>();
  c.summary["steps"] = traj.steps;
  c.summary["samples"] = traj.size();
  c.summary["relative_energy_drift"] = traj.relative_energy_drift();
  c.summary["free_flow_deviation"] = deviation;
  c.summary["final"] = {{"x", end.x}, {"y", end.y}, {"eta", end.eta}, {"zeta", end.zeta}};
}

void run_momenta(Context& c) {
  const auto spec = c.config.potential();
  const auto [x_lo, x_hi] = range(c.doc, "momenta.x_range");
  const auto n = integer(c.doc, "momenta.samples", 1, 100000);
  classical::MomentumOptions opt;
  opt.target = c.tol("momenta");
  opt.tol = positive(c.doc, "momenta.integrator_tol");
  opt.t_max = positive(c.doc, "momenta.t_max");
  auto rng = c.rng(1);
  std::vector<PhasePoint> starts;
  for (long long i = 0; i < n; ++i)
    starts.push_back(zero_energy_point(rng, spec, c.d, x_lo, x_hi, positive(c.doc, "momenta.y_max"),
                                       positive(c.doc, "momenta.zeta_max")));
  struct Pair {
    classical::MomentumLimit plus, minus;
  };
  const auto limits = parallel_map(starts.size(), default_workers(), [&](std::size_t i) {
    return Pair{classical::asymptotic_momentum(spec, starts[i], 1, opt),
                classical::asymptotic_momentum(spec, starts[i], -1, opt)};
  });
  const int m = c.d - 1;
  Csv csv(c.artifact("momenta.csv"), header("index", "x", indexed("y", m), "eta", indexed("zeta", m),
                                            indexed("zeta_plus", m), indexed("zeta_minus", m), "error_plus",
                                            "error_minus"));
  double deflection = 0, worst_error = 0;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto& p = starts[i];
    std::vector<double> row{static_cast<double>(i), p.x};
    row.insert(row.end(), p.y.begin(), p.y.end());
    row.push_back(p.eta);
    row.insert(row.end(), p.zeta.begin(), p.zeta.end());
    row.insert(row.end(), limits[i].plus.zeta.begin(), limits[i].plus.zeta.end());
    row.insert(row.end(), limits[i].minus.zeta.begin(), limits[i].minus.zeta.end());
    row.push_back(limits[i].plus.error);
    row.push_back(limits[i].minus.error);
    csv.row(row);
    for (int k = 0; k < m; ++k) deflection = std::max(deflection, std::abs(limits[i].plus.zeta[k] - limits[i].minus.zeta[k]));
    worst_error = std::max({worst_error, limits[i].plus.error, limits[i].minus.error});
  }
  c.summary["samples"] = starts.size();
  c.summary["max_deflection"] = deflection;
  c.summary["max_extrapolation_error"] = worst_error;
}

void run_eikonal(Context& c) {
  const auto [lo, hi] = range(c.doc, "eikonal.x_range");
  const double ratio = positive(c.doc, "eikonal.y_over_x");
  if (ratio >= 1) config_error("eikonal", "eikonal.y_over_x must be below 1");
  const auto n = integer(c.doc, "eikonal.points", 1, 100'000'000);
  auto rng = c.rng(2);
  Csv csv(c.artifact("eikonal.csv"), header("x", indexed("y", c.d - 1), "theta1", "residual"));
  double worst = 0;
  for (long long i = 0; i < n; ++i) {
    auto p = eikonal_point(rng, c.d, lo, hi, ratio);
    const auto t1 = parabolic::theta1_calculus(p[0], std::span<const double>(p).subspan(1));
    const double residual = eikonal_residual(p);
    worst = std::max(worst, std::abs(residual));
    p.push_back(t1.value);
    p.push_back(residual);
    csv.row(p);
  }
  c.summary["points"] = n;
  c.summary["max_residual"] = worst;
  c.summary["tolerance"] = c.tol("identity");
  c.summary["within_tolerance"] = worst <= c.tol("identity");
}

std::vector<PhasePoint> transport_ray(const Context& c) {
  const auto xs = numbers(c.doc, "transport.ray_x");
  if (xs.size() < 4) config_error("transport", "transport.ray_x needs at least 4 entries");
  return transport::ray_points(xs, vector_of(c.doc, "transport.ray_c", c.d - 1, 0.5),
                               vector_of(c.doc, "transport.ray_zeta", c.d - 1, 0.2));
}

void run_transport(Context& c) {
  const auto spec = c.config.potential();
  const auto opt = transport_options(c);
  const auto n = integer(c.doc, "transport.points", 1, 100000);
  const auto levels = static_cast<int>(integer(c.doc, "transport.refinements", 2, 12));
  const double h_scale = positive(c.doc, "transport.h_scale");
  auto rng = c.rng(3);
  std::vector<PhasePoint> points;
  for (long long i = 0; i < n; ++i) points.push_back(outgoing_point(rng, c.d, opt.m));

  struct Row {
    int k;
    Complex b, q;
    std::vector<double> residuals;
  };
  std::vector<std::pair<std::size_t, int>> jobs;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (int k = 1; k <= opt.k_max; ++k) jobs.emplace_back(i, k);
  const auto rows = parallel_map(jobs.size(), default_workers(), [&](std::size_t j) {
    const auto& p = points[jobs[j].first];
    const int k = jobs[j].second;
    Row r{k, transport::symbol_b(k, p, spec, 1, opt), transport::symbol_q(k, p, spec, 1, opt), {}};
    const double h0 = h_scale * std::sqrt(p.x);
    for (int l = 0; l < levels; ++l) r.residuals.push_back(transport::transport_residual(k, p, spec, 1, h0 / (1 << l), opt));
    return r;
  });

  const int m = c.d - 1;
  std::vector<std::string> head = header("point", "k", "x", indexed("y", m), "eta", indexed("zeta", m), "re_b", "im_b",
                                         "re_q", "im_q", indexed("residual", levels), "order");
  Csv csv(c.artifact("transport.csv"), head);
  double worst_order_gap = 0;
  bool vanishing = true;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const auto& p = points[jobs[j].first];
    const auto& r = rows[j];
    std::vector<double> row{static_cast<double>(jobs[j].first), static_cast<double>(r.k), p.x};
    row.insert(row.end(), p.y.begin(), p.y.end());
    row.push_back(p.eta);
    row.insert(row.end(), p.zeta.begin(), p.zeta.end());
    row.insert(row.end(), {r.b.real(), r.b.imag(), r.q.real(), r.q.imag()});
    row.insert(row.end(), r.residuals.begin(), r.residuals.end());
    const double order = std::log2(r.residuals[levels - 2] / r.residuals[levels - 1]);
    row.push_back(order);
    csv.row(row);
    if (r.residuals[0] > 0) {
      vanishing = false;
      for (int l = 0; l + 1 < levels; ++l)
        worst_order_gap = std::max(worst_order_gap, std::abs(std::log2(r.residuals[l] / r.residuals[l + 1]) - 2));
    }
  }
  c.summary["points"] = n;
  c.summary["max_order_deviation"] = vanishing ? json(nullptr) : json(worst_order_gap);

  if (spec.kind != PotentialKind::zero) {
    const auto ray = transport_ray(c);
    Csv rc(c.artifact("transport_ray.csv"), header("x", "abs_b1", "abs_q1", "abs_b2", "abs_q2"));
    const auto mags = parallel_map(ray.size(), default_workers(), [&](std::size_t i) {
      return std::vector<double>{ray[i].x, std::abs(transport::symbol_b(1, ray[i], spec, 1, opt)),
                                 std::abs(transport::symbol_q(1, ray[i], spec, 1, opt)),
                                 std::abs(transport::symbol_b(2, ray[i], spec, 1, opt)),
                                 std::abs(transport::symbol_q(2, ray[i], spec, 1, opt))};
    });
    json slopes;
    std::vector<double> xs;
    for (const auto& r : mags) {
      rc.row(r);
      xs.push_back(r[0]);
    }
    const char* names[] = {"b1", "q1", "b2", "q2"};
    for (int col = 1; col <= 4; ++col) {
      std::vector<double> ys;
      for (const auto& r : mags) ys.push_back(r[col]);
      slopes[names[col - 1]] = fit_power_law(xs, ys).slope;
    }
    c.summary["decay_exponents"] = slopes;
  }
}

void run_born(Context& c) {
  const auto spec = c.config.potential();
  const double lambda = number(c.doc, "born.lambda");
  const auto zeta = vector_of(c.doc, "born.zeta", c.d - 1);
  const double R = number(c.doc, "born.R");
  const auto [lo, hi] = range(c.doc, "born.y_range");
  const auto n = integer(c.doc, "born.points", 2, 100000);
  const bool law = has_power_law(spec) && spec.alpha > 0.5 && spec.alpha < c.d - 0.5;
  std::vector<double> radii;
  for (long long i = 0; i < n; ++i) radii.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  const auto values = parallel_map(radii.size(), default_workers(), [&](std::size_t i) {
    std::vector<double> y(c.d - 1, 0.0);
    y[0] = radii[i];
    return kernel::born_symbol_value(spec, zeta, y, lambda, R, c.tol("born"));
  });
  Csv csv(c.artifact("born.csv"), header("r", "re_t", "im_t", "error", "truncation", "re_asymptote", "im_asymptote"));
  double last_ratio = std::nan("");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::vector<double> y(c.d - 1, 0.0);
    y[0] = radii[i];
    Complex asym(std::nan(""), std::nan(""));
    if (law) asym = kernel::homogeneous_symbol_asymptote(spec.kappa, spec.alpha, y);
    const auto& v = values[i];
    csv.row({radii[i], v.value.real(), v.value.imag(), v.error, v.truncation, asym.real(), asym.imag()});
    if (law) last_ratio = std::abs(v.value) / std::abs(asym);
  }
  c.summary["points"] = n;
  c.summary["cutoff"] = values.back().cutoff;
  if (law) c.summary["asymptote_ratio_at_max_r"] = last_ratio;
}

kernel::KernelFit kernel_fit(const Context& c, const PotentialSpec& spec) {
  if (!has_power_law(spec)) config_error("kernel", "the kernel law needs a coulomb or homogeneous potential");
  if (c.d < 2 || c.d > 4) config_error("kernel", "kernel grids support dimension 2 to 4");
  kernel::GridOptions g;
  g.nodes = static_cast<std::size_t>(integer(c.doc, "kernel.nodes", 8, 1 << 30));
  g.extent = positive(c.doc, "kernel.extent");
  g.radial_knots = static_cast<int>(integer(c.doc, "kernel.radial_knots", 16, 1'000'000));
  kernel::FftOptions f;
  f.taper = number(c.doc, "kernel.taper");
  f.k_lo = number(c.doc, "kernel.k_lo");
  f.k_hi = number(c.doc, "kernel.k_hi");
  f.bins = static_cast<int>(integer(c.doc, "kernel.bins", 2, 100000));
  if (f.taper < 0 || f.taper >= 1) config_error("kernel", "kernel.taper must be in [0, 1)");
  const auto grid = kernel::born_symbol_grid(spec, c.d, vector_of(c.doc, "kernel.zeta", c.d - 1),
                                             number(c.doc, "kernel.lambda"), g, number(c.doc, "kernel.R"),
                                             c.tol("born"));
  return kernel::kernel_fft_check(grid, kernel::kernel_singularity_law(c.d, spec.alpha, spec.kappa), f);
}

void run_kernel(Context& c) {
  const auto fit = kernel_fit(c, c.config.potential());
  Csv csv(c.artifact("kernel.csv"), header("k", "magnitude", "fitted", "residual", "modes"));
  for (const auto& b : fit.bins) csv.row({b.k, b.magnitude, b.fitted, b.residual, static_cast<double>(b.modes)});
  c.summary["exponent"] = fit.exponent;
  c.summary["exponent_stderr"] = fit.exponent_stderr;
  c.summary["prefactor"] = fit.prefactor;
  c.summary["prefactor_at_law_exponent"] = fit.prefactor_at_law_exponent;
  c.summary["law_exponent"] = fit.law.exponent;
  c.summary["law_prefactor"] = {fit.law.prefactor.real(), fit.law.prefactor.imag()};
  c.summary["k_window"] = {fit.k_lo, fit.k_hi};
}

oscillatory::ConvergenceResult airy_convergence(const Context& c) {
  const auto ad = integer(c.doc, "airy.dimension", 2, 3);
  const auto center = numbers(c.doc, "airy.xi_center");
  if (static_cast<long long>(center.size()) != ad - 1) config_error("airy", "airy.xi_center must have dimension - 1 entries");
  const auto xi = oscillatory::XiProfile::bump(center, positive(c.doc, "airy.xi_width"));
  const auto xs = numbers(c.doc, "airy.x");
  if (xs.size() < 2) config_error("airy", "airy.x needs at least two entries");
  oscillatory::EigenfunctionOptions opt;
  opt.tol = c.tol("eigenfunction");
  return oscillatory::asymptotic_convergence(number(c.doc, "airy.y_over_x"), xs, xi, number(c.doc, "airy.lambda"), opt);
}

void run_airy(Context& c) {
  const auto conv = airy_convergence(c);
  const int m = static_cast<int>(conv.samples.front().y.size());
  Csv csv(c.artifact("airy-compare.csv"),
          header("x", indexed("y", m), "re_exact", "im_exact", "re_asymptote", "im_asymptote", "rel_error"));
  for (const auto& s : conv.samples) {
    std::vector<double> row{s.x};
    row.insert(row.end(), s.y.begin(), s.y.end());
    row.insert(row.end(), {s.exact.real(), s.exact.imag(), s.asymptotic.real(), s.asymptotic.imag(), s.rel_error});
    csv.row(row);
  }
  c.summary["exponent"] = conv.exponent();
  c.summary["final_rel_error"] = conv.samples.back().rel_error;
  c.summary["monotone"] = conv.monotone();
}

// ---------------------------------------------------------------- verify-all

void verify_eikonal(Context& c, Checks& out) {
  auto rng = c.rng(10);
  const auto n = integer(c.doc, "verify.eikonal_points", 1, 100'000'000);
  double worst = 0;
  for (long long i = 0; i < n; ++i) {
    const auto p = eikonal_point(rng, c.d, 10, 1e6, 0.1);
    worst = std::max(worst, std::abs(eikonal_residual(p)));
  }
  out.at_most("eikonal", "max |grad theta1|^2/2 - x", worst, c.tol("identity"));
}

void verify_parabolic(Context& c, Checks& out) {
  auto rng = c.rng(11);
  const auto n = integer(c.doc, "verify.parabolic_points", 1, 100'000'000);
  const int d = c.d;
  const double tol = c.tol("identity");
  double sum_err = 0, diff_err = 0, speed_err = 0, orth_err = 0, lap_err = 0, jac_err = 0;
  for (long long i = 0; i < n; ++i) {
    const auto p = identity_point(rng, d);
    const std::span<const double> y(p.data() + 1, d - 1);
    const double r = std::sqrt(sq_norm(p));
    const auto pp = parabolic::to_parabolic(p[0], y);
    const double g2 = sq_norm(pp.g);
    sum_err = std::max(sum_err, std::abs(pp.f * pp.f + g2 - 2 * r) / r);
    diff_err = std::max(diff_err, std::abs(pp.f * pp.f - g2 - 2 * p[0]) / r);
    std::vector<double> gf(d);
    parabolic::f_gradient<double>(p[0], y, gf);
    speed_err = std::max(speed_err, std::abs(2 * r * sq_norm(gf) - 1));
    for (int k = 1; k < d; ++k) {
      double dot = 0;
      for (int j = 0; j < d; ++j) dot += gf[j] * ((j == k ? 1.0 / pp.f : 0.0) - p[k] * gf[j] / (pp.f * pp.f));
      orth_err = std::max(orth_err, std::abs(dot) * pp.f);
    }
    const double lap = parabolic::theta_calculus(p[0], y, d).laplacian;
    const double expected = 0.5 * d * pp.f / r;
    lap_err = std::max(lap_err, std::abs(lap - expected) / expected);

    const double h = 1e-5 * r;
    std::vector<double> jac(d * d);
    bool inside = true;
    for (int j = 0; j < d; ++j) {
      auto up = p, down = p;
      up[j] += h;
      down[j] -= h;
      const std::span<const double> yu(up.data() + 1, d - 1), yd(down.data() + 1, d - 1);
      inside = inside && parabolic::in_identity_regime(up[0], yu) && parabolic::in_identity_regime(down[0], yd);
      const auto a = parabolic::to_parabolic(up[0], yu);
      const auto b = parabolic::to_parabolic(down[0], yd);
      jac[j] = (a.f - b.f) / (2 * h);
      for (int k = 1; k < d; ++k) jac[k * d + j] = (a.g[k - 1] - b.g[k - 1]) / (2 * h);
    }
    if (inside) {
      const double exact = parabolic::jacobian_det(p[0], y, d);
      const double closed = std::pow(pp.f, 2 - d) / (pp.f * pp.f + g2);
      jac_err = std::max({jac_err, std::abs(std::abs(determinant(jac, d)) - exact) / exact,
                          std::abs(closed - exact) / exact});
    }
  }
  out.at_most("parabolic", "max |f^2 + g^2 - 2r| / r", sum_err, tol);
  out.at_most("parabolic", "max |f^2 - g^2 - 2x| / r", diff_err, tol);
  out.at_most("parabolic", "max |2r |grad f|^2 - 1|", speed_err, tol);
  out.at_most("parabolic", "max f |grad f . grad g_k|", orth_err, tol);
  out.at_most("parabolic", "max relative error of lap theta against (d/2) f / r", lap_err, tol);
  out.at_most("parabolic", "max relative error of the jacobian against finite differences", jac_err, 1e-6);
}

void verify_constants(Context& c, Checks& out) {
  double c1_err = 0;
  for (double alpha : {0.8, 1.0, 1.5, 2.0, 3.0}) {
    // t = s^4 removes the endpoint singularity of the defining integral
    auto f = [&](double s) { return 4.0 * std::pow(s * s * s * s + 1.0, -alpha / 2); };
    quadrature::Options q{1e-15, 1e-14, 4000};
    const double head = quadrature::integrate(f, 0.0, 1.0, q).value;
    quadrature::TailOptions t;
    t.quad = q;
    t.horizon = 1e6;
    t.decay_power = 2 * alpha;
    const double tail = quadrature::integrate_to_infinity(f, 1.0, t).value;
    const double integral = std::pow(2.0, -1.5) * (head + tail);
    c1_err = std::max(c1_err, std::abs(special::c1_constant(alpha) - integral) / integral);
  }
  out.at_most("constants", "max relative error of c1 against its defining integral", c1_err, 1e-8);
  const Complex coulomb(0, -1 / std::sqrt(2 * pi));
  out.at_most("constants", "|c2(3, 1) + i (2 pi)^{-1/2}|", std::abs(special::c2_constant(3, 1.0) - coulomb), 1e-12);
  auto rng = c.rng(12);
  double chain = 0;
  for (int i = 0; i < 20; ++i) {
    const int d = 2 + static_cast<int>(rng() % 4);
    std::uniform_real_distribution<double> a(0.51, d - 0.51);
    const double alpha = a(rng);
    const auto reduced = special::c2_constant(d, alpha);
    chain = std::max(chain, std::abs(reduced - special::c2_constant_chain(d, alpha)) / std::abs(reduced));
  }
  out.at_most("constants", "max relative gap between the two c2 forms", chain, 1e-12);
}

void verify_region(Context& c, Checks& out) {
  const double m = positive(c.doc, "region.m"), eps = positive(c.doc, "region.eps");
  const auto n = integer(c.doc, "verify.region_points", 1, 100'000'000);
  auto rng = c.rng(13);
  std::uniform_real_distribution<double> pos(-50, 50), mom(-10, 10);
  for (int sign : {1, -1}) {
    long long sampled = 0, violations = 0;
    while (sampled < n) {
      PhasePoint p;
      p.x = pos(rng);
      p.eta = mom(rng);
      for (int i = 1; i < c.d; ++i) {
        p.y.push_back(pos(rng));
        p.zeta.push_back(mom(rng));
      }
      if (!classical::in_region_X(p, m, eps, sign)) continue;
      ++sampled;
      for (double t : {1.0, 10.0, 100.0})
        if (!classical::in_region_X(classical::free_flow(p, sign * t), m, eps, sign)) ++violations;
    }
    out.equal("region", sign > 0 ? "violations in X+ under the forward flow" : "violations in X- under the backward flow",
              static_cast<double>(violations), 0);
  }
}

void verify_decay(Context& c, Checks& out, const PotentialSpec& spec) {
  const auto n = integer(c.doc, "verify.decay_orbits", 1, 100000);
  const auto [t_lo, t_hi] = range(c.doc, "verify.decay_window");
  auto rng = c.rng(14);
  std::vector<PhasePoint> starts;
  for (long long i = 0; i < n; ++i) starts.push_back(zero_energy_point(rng, spec, c.d, 20, 50, 2, 0.5));
  classical::OrbitOptions o;
  o.tol = std::min(c.tol("orbit"), 1e-13);
  o.samples = classical::log_spaced_times(1.0, t_hi, 8);
  const auto slopes = parallel_map(starts.size(), default_workers(), [&](std::size_t i) {
    const auto tr = classical::integrate_orbit(spec, starts[i], t_hi, o);
    return std::pair{classical::decay_slope(tr, classical::Observable::Gamma_norm, t_lo, t_hi).slope(),
                     classical::decay_slope(tr, classical::Observable::gamma_par, t_lo, t_hi).slope()};
  });
  double g = 0, par = 0;
  for (const auto& [a, b] : slopes) {
    g += a / n;
    par += b / n;
  }
  out.at_most("decay", "mean slope of log|Gamma|", g, -0.9);
  out.at_most("decay", "mean slope of log|gamma_par|", par, -1 - 2 * spec.delta + 0.2);
}

void verify_transport(Context& c, Checks& out, const PotentialSpec& spec) {
  const auto opt = transport_options(c);
  auto rng = c.rng(15);
  std::vector<PhasePoint> points;
  for (int i = 0; i < 10; ++i) points.push_back(outgoing_point(rng, c.d, opt.m));
  const auto gaps = parallel_map(points.size() * 2, default_workers(), [&](std::size_t j) {
    const auto& p = points[j / 2];
    const int k = 1 + static_cast<int>(j % 2);
    const double h0 = 0.05 * std::sqrt(p.x);
    double r[3];
    for (int l = 0; l < 3; ++l) r[l] = transport::transport_residual(k, p, spec, 1, h0 / (1 << l), opt);
    return std::max(std::abs(std::log2(r[0] / r[1]) - 2), std::abs(std::log2(r[1] / r[2]) - 2));
  });
  out.at_most("transport", "max |observed order - 2| of the residual, k = 1, 2", *std::max_element(gaps.begin(), gaps.end()),
              0.1);
  const auto ray = transport_ray(c);
  const double b1 = transport::decay_fit_symbols(1, transport::Symbol::b, spec, 1, ray, opt).slope;
  const double q1 = transport::decay_fit_symbols(1, transport::Symbol::q, spec, 1, ray, opt).slope;
  if (spec.kind == PotentialKind::coulomb) {
    out.at_most("transport", "|decay exponent of b1 + 1/2|", std::abs(b1 + 0.5), 0.1);
    out.at_most("transport", "|decay exponent of q1 + 3/2|", std::abs(q1 + 1.5), 0.1);
  } else {
    out.at_most("transport", "decay exponent of b1", b1, -spec.delta + 0.1);
    out.at_most("transport", "decay exponent of q1", q1, -(0.5 + 2 * spec.delta) + 0.1);
  }
}

void verify_airy(Context& c, Checks& out) {
  const auto conv = airy_convergence(c);
  out.at_most("stationary_phase", "relative error at the largest x", conv.samples.back().rel_error, 0.01);
  out.at_most("stationary_phase", "convergence exponent", conv.exponent(), -0.5);
}

void verify_kernel(Context& c, Checks& out, const PotentialSpec& spec) {
  const auto fit = kernel_fit(c, spec);
  out.at_most("kernel", "|fitted exponent - law exponent|", std::abs(fit.exponent - fit.law.exponent), 0.1);
  out.at_most("kernel", "|prefactor / law prefactor - 1|",
              std::abs(fit.prefactor_at_law_exponent / std::abs(fit.law.prefactor) - 1), 0.1);
}

void verify_free(Context& c, Checks& out) {
  const auto zero = PotentialSpec::zero();
  auto opt = transport_options(c);
  auto rng = c.rng(16);
  double b_max = 0, t_max = 0, zeta_shift = 0;
  for (int i = 0; i < 10; ++i) {
    const auto p = outgoing_point(rng, c.d, opt.m);
    for (int k = 1; k <= 2; ++k)
      b_max = std::max({b_max, std::abs(transport::symbol_b(k, p, zero, 1, opt)),
                        std::abs(transport::symbol_q(k, p, zero, 1, opt))});
    std::vector<double> y = p.y;
    for (double& v : y) v *= 10;
    t_max = std::max(t_max, std::abs(kernel::born_symbol(zero, p.zeta, y, 0.0, 0.0, c.tol("born"))));
    for (int sign : {1, -1}) {
      const auto lim = classical::asymptotic_momentum(zero, p, sign);
      for (std::size_t k = 0; k < p.zeta.size(); ++k) zeta_shift = std::max(zeta_shift, std::abs(lim.zeta[k] - p.zeta[k]));
    }
  }
  out.equal("free", "max |b_k|, |q_k| for k = 1, 2", b_max, 0);
  out.equal("free", "max |t|", t_max, 0);
  out.equal("free", "max |zeta_pm - zeta|", zeta_shift, 0);
}

void run_verify(Context& c, int& exit_code) {
  const auto spec = c.config.potential();
  Checks checks;
  verify_eikonal(c, checks);
  verify_parabolic(c, checks);
  verify_constants(c, checks);
  verify_region(c, checks);
  if (spec.kind != PotentialKind::zero) {
    verify_decay(c, checks, spec);
    verify_transport(c, checks, spec);
  }
  verify_airy(c, checks);
  if (has_power_law(spec) && node(c.doc, "verify.kernel").get<bool>()) verify_kernel(c, checks, spec);
  verify_free(c, checks);

  Csv csv(c.artifact("verify.csv"), {"suite", "check", "value", "relation", "bound", "pass"});
  std::map<std::string, std::pair<int, int>> suites;
  int failed = 0;
  for (const auto& ch : checks.list) {
    csv.line({ch.suite, "\"" + ch.name + "\"", fmt(ch.value), ch.relation, fmt(ch.bound), ch.pass ? "1" : "0"});
    ++suites[ch.suite].first;
    if (!ch.pass) {
      ++suites[ch.suite].second;
      ++failed;
    }
  }
  for (const auto& [name, counts] : suites) c.summary["suites"][name] = {{"checks", counts.first}, {"failed", counts.second}};
  c.summary["checks"] = checks.list.size();
  c.summary["failed"] = failed;
  if (failed > 0) exit_code = 1;
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

RunConfig::RunConfig() : doc_(defaults()) {}

const json& RunConfig::defaults() {
  static const json d = json::parse(kDefaults);
  return d;
}

void RunConfig::merge(const json& patch, const std::string& prefix) {
  if (!patch.is_object()) config_error("load", "configuration must be a JSON object");
  for (const auto& [key, value] : patch.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    const json& def = node(defaults(), prefix.empty() ? key : path);
    if (def.is_object()) {
      merge(value, path);
    } else {
      set(path, value.dump());
    }
  }
}

RunConfig RunConfig::from_json(const std::string& text) {
  json patch;
  try {
    patch = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error("load", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  c.merge(patch, "");
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("load", "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void RunConfig::set(const std::string& path, const std::string& value) {
  const json* def = &defaults();
  json* cur = &doc_;
  const auto parts = split_path(path);
  if (parts.empty()) config_error("set", "empty key");
  for (const auto& key : parts) {
    if (!def->is_object() || !def->contains(key)) config_error("set", "unknown key " + path);
    def = &(*def)[key];
    cur = &(*cur)[key];
  }
  if (def->is_object()) config_error("set", path + " is a section, not a value");
  json v;
  try {
    v = json::parse(value);
  } catch (const json::parse_error&) {
    v = value;
  }
  if (!compatible(*def, v))
    config_error("set", path + " expects " + (def->is_null() ? std::string("number or null") : type_name(*def)) +
                            ", got " + type_name(v));
  *cur = v;
}

int RunConfig::dimension() const { return static_cast<int>(integer(doc_, "dimension", 2, 64)); }

PotentialSpec RunConfig::potential() const {
  const json& p = doc_["potential"];
  const auto kind = potentials::kind_from_string(p["kind"].get<std::string>());
  const double kappa = p["kappa"].get<double>(), softening = p["softening"].get<double>();
  PotentialSpec s;
  switch (kind) {
    case PotentialKind::zero:
      s = PotentialSpec::zero();
      break;
    case PotentialKind::coulomb:
      s = PotentialSpec::coulomb(kappa, softening);
      break;
    case PotentialKind::homogeneous:
      s = PotentialSpec::homogeneous(kappa, p["alpha"].get<double>(), softening);
      s.delta = p["delta"].get<double>();
      break;
    case PotentialKind::table:
      s = PotentialSpec::tabulated(potentials::RadialTable(numbers(doc_, "potential.r"), numbers(doc_, "potential.q")),
                                   p["delta"].get<double>(), softening);
      break;
  }
  s.exclusion_radius = p["exclusion_radius"].get<double>();
  return s;
}

void RunConfig::validate() const {
  const int d = dimension();
  integer(doc_, "seed", 0, 1LL << 53);
  integer(doc_, "workers", 0, 4096);
  if (doc_["output_dir"].get<std::string>().empty()) config_error("validate", "output_dir must not be empty");
  for (const auto& [key, value] : doc_["tolerances"].items()) positive(doc_, "tolerances." + key);
  positive(doc_, "region.m");
  positive(doc_, "region.eps");
  const auto& pot = doc_["potential"];
  if (pot["kind"] == "coulomb" && pot["delta"].get<double>() != 0.5)
    config_error("validate", "coulomb potentials have delta = 0.5");
  potentials::validate(potential(), d);
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"orbit",  "momenta", "eikonal",      "transport",
                                              "born",   "kernel",  "airy-compare", "verify-all"};
  return names;
}

RunOutcome run(const RunConfig& config, const std::string& subcommand) {
  json summary{{"subcommand", subcommand}};
  int code = 0;
  try {
    if (std::find(subcommands().begin(), subcommands().end(), subcommand) == subcommands().end())
      config_error("run", "unknown subcommand " + subcommand);
    config.validate();
    set_default_workers(static_cast<unsigned>(config.document()["workers"].get<double>()));
    Context c{config, config.document(), config.dimension(), config.document()["output_dir"].get<std::string>(), json::object(), {}};
    std::error_code ec;
    std::filesystem::create_directories(c.dir, ec);
    if (ec) config_error("run", "cannot create " + c.dir.string() + ": " + ec.message());
    if (subcommand == "orbit") run_orbit(c);
    else if (subcommand == "momenta") run_momenta(c);
    else if (subcommand == "eikonal") run_eikonal(c);
    else if (subcommand == "transport") run_transport(c);
    else if (subcommand == "born") run_born(c);
    else if (subcommand == "kernel") run_kernel(c);
    else if (subcommand == "airy-compare") run_airy(c);
    else run_verify(c, code);
    summary["status"] = code == 0 ? "ok" : "failed";
    summary["dimension"] = c.d;
    summary["potential"] = config.document()["potential"]["kind"];
    summary["results"] = c.summary;
    const std::string json_name = subcommand + ".json";
    c.artifacts.push_back(json_name);
    summary["artifacts"] = c.artifacts;
    std::ofstream(c.dir / json_name, std::ios::binary) << summary.dump(2) << '\n';
  } catch (const Error& e) {
    code = static_cast<int>(e.kind());
    summary["status"] = "error";
    summary["error"] = {{"kind", e.kind() == ErrorKind::config   ? "config"
                                 : e.kind() == ErrorKind::budget ? "budget"
                                                                 : "domain"},
                        {"module", e.module()},
                        {"operation", e.operation()},
                        {"message", e.what()}};
    if (const auto* b = dynamic_cast<const BudgetError*>(&e)) summary["error"]["budget"] = b->budget();
  } catch (const std::exception& e) {
    code = static_cast<int>(ErrorKind::domain);
    summary["status"] = "error";
    summary["error"] = {{"kind", "domain"}, {"module", "cli"}, {"operation", "run"}, {"message", e.what()}};
  }
  set_default_workers(0);
  return {code, summary.dump()};
}

}  // namespace stark::cli
