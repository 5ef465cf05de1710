#ifndef FRACCAP_EXPERIMENTS_HPP
#define FRACCAP_EXPERIMENTS_HPP

// Drivers for the shipped experiments. The CLI writes their JSON reports and
// the acceptance binary checks their numbers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "fraccap/capacity.hpp"
#include "fraccap/geometry.hpp"
#include "fraccap/kernels.hpp"
#include "fraccap/measures.hpp"
#include "fraccap/potentials.hpp"
#include "fraccap/quadrature.hpp"

namespace fraccap::experiments {

using Json = nlohmann::ordered_json;

inline std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = std::exp(std::log(a) + (n == 1 ? 0.0 : i * (std::log(b) - std::log(a)) / (n - 1)));
  return v;
}

// ---------------------------------------------------------------------------
// Horizontal segment potential

struct SegmentPotentialConfig {
  double length = 1.0;
  int atoms = 2000;
  GridSpec sup_grid = GridSpec::box2(-1.0, 2.0, 0.01, 2.0, 301, 200, 0.0);
  std::vector<int> convergence_atoms = {250, 500, 1000, 2000};
};

struct SegmentPotentialResult {
  std::vector<SpacetimePoint> points;
  std::vector<double> numeric;
  std::vector<double> exact;
  double max_abs_error = 0.0;
  double sup = 0.0;
  std::vector<double> convergence_errors;
  GridEvaluation grid_values;
  Json json;
};

/// Closed form of the s = 1/2 potential of the unit-density segment [0, L]
/// at (a, s), s > 0.
inline double segment_potential_exact(double L, double a, double s) {
  return std::atan((L - a) / s) - std::atan(-a / s);
}

inline std::vector<SpacetimePoint> segment_probe_points(double L) {
  std::vector<SpacetimePoint> pts;
  for (double s : {0.05, 0.1, 0.2, 0.5, 1.0})
    for (int i = 0; i < 10; ++i) pts.emplace_back(std::vector<double>{L * (0.05 + 0.1 * i)}, s);
  return pts;
}

inline SegmentPotentialResult segment_potential(const SegmentPotentialConfig& cfg) {
  const FracParams params(0.5, 1);
  const KernelKind kind = HalfKernel{};
  Segment seg;
  seg.length = cfg.length;
  SegmentPotentialResult r;
  r.points = segment_probe_points(cfg.length);
  auto max_error = [&](const DiscreteMeasure& mu, std::vector<double>* num) {
    double e = 0.0;
    for (const auto& p : r.points) {
      const double v = potential(mu, kind, Plain{}, p, params);
      if (num) num->push_back(v);
      e = std::max(e, std::abs(v - segment_potential_exact(cfg.length, p.x[0], p.t)));
    }
    return e;
  };
  const auto mu = segment_measure(seg, cfg.atoms);
  r.max_abs_error = max_error(mu, &r.numeric);
  for (const auto& p : r.points) r.exact.push_back(segment_potential_exact(cfg.length, p.x[0], p.t));
  for (int m : cfg.convergence_atoms) r.convergence_errors.push_back(max_error(segment_measure(seg, m), nullptr));
  r.grid_values = evaluate_on_grid(mu, kind, cfg.sup_grid, params);
  r.sup = r.grid_values.sup;
  Json j;
  j["experiment"] = "segment-potential";
  j["length"] = cfg.length;
  j["atoms"] = cfg.atoms;
  j["probe_points"] = r.points.size();
  j["max_abs_error"] = r.max_abs_error;
  j["sup_on_grid"] = r.sup;
  j["sup_grid"] = grid_json(cfg.sup_grid);
  j["convergence_atoms"] = cfg.convergence_atoms;
  j["convergence_errors"] = r.convergence_errors;
  r.json = std::move(j);
  return r;
}

// ---------------------------------------------------------------------------
// Segment capacities

inline CapacityOptions horizontal_segment_options(int atoms, double length = 1.0) {
  CapacityOptions o;
  const double rho = 2.0 * length / atoms;
  const double L = length;
  o.grid = GridSpec::box2(-L, 2.0 * L, 0.005 * L, 2.0 * L, 200, 200, rho);
  o.verify_grid = GridSpec::box2(-L, 2.0 * L, 0.005 * L, 2.0 * L, 400, 400, 0.5 * rho);
  return o;
}

inline CapacityEstimate horizontal_segment_capacity(int atoms, double length = 1.0,
                                                    CapacityMode mode = CapacityMode::half) {
  Segment seg;
  seg.length = length;
  return capacity_lower(seg, mode, FracParams(0.5, 1), atoms, horizontal_segment_options(atoms, length));
}

struct VerticalLevel {
  int level = 0;
  int atoms = 0;
  CapacityEstimate estimate;
};

/// Constraint grid for `atoms` atoms on the vertical segment {0} x [0, L]:
/// atoms + 1 nodes per axis on [-L, L] x [-L/2, 3L/2], exclusion twice the
/// atom spacing.
inline CapacityOptions vertical_segment_options(int atoms, double length = 1.0) {
  CapacityOptions o;
  const double L = length;
  o.grid = GridSpec::box2(-L, L, -0.5 * L, 1.5 * L, atoms + 1, atoms + 1, 2.0 * L / atoms);
  return o;
}

/// Level m uses 2^{m+2} atoms, so each level doubles the constraint density.
inline std::vector<VerticalLevel> vertical_segment_sequence(int first = 2, int last = 6, double length = 1.0) {
  std::vector<VerticalLevel> out;
  for (int m = first; m <= last; ++m) {
    const int atoms = 1 << (m + 2);
    Segment seg;
    seg.orientation = Orientation::vertical;
    seg.length = length;
    out.push_back({m, atoms, capacity_lower(seg, CapacityMode::half, FracParams(0.5, 1), atoms,
                                            vertical_segment_options(atoms, length))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel cross-checks

struct KernelChecks {
  double half_ratio_min = 0.0, half_ratio_max = 0.0;
  double gaussian_max_rel_error = 0.0;
  std::vector<double> normalization_s;
  std::vector<double> normalization_error;
  Json json;
};

/// Integral over x of P_s(x, t): table quadrature on panels up to the end of
/// the table, analytic tail beyond.
inline double profile_mass(const KernelProfile& prof, double t) {
  const FracParams& params = prof.params();
  if (params.N != 1) throw std::invalid_argument("profile_mass: N = 1 only");
  const KernelKind kind = ProfileKernel{std::make_shared<const KernelProfile>(prof)};
  const double scale = std::pow(t, 1.0 / (2.0 * params.s));
  const auto& g = prof.grid();
  const quad::GaussLegendre gl(8);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.size(); ++i)
    acc += gl.integrate([&](double u) { return radial_kernel(kind, u * scale, t, params) * scale; }, g[i], g[i + 1]);
  const double um = prof.u_max();
  if (prof.gaussian_limit()) {
    // phi(u_max) exp(-(u^2 - u_max^2) / 4) integrated to infinity.
    acc += prof.values().back() * std::sqrt(std::numbers::pi) * std::exp(um * um / 4.0) * std::erfc(um / 2.0);
  } else {
    acc += prof.tail_coefficient() * std::pow(um, -2.0 * params.s) / (2.0 * params.s);
  }
  return 2.0 * acc;
}

inline KernelChecks kernel_cross_checks(const QuadratureSettings& q = {}) {
  KernelChecks r;
  const FracParams half(0.5, 1);
  const auto p_half = build_profile(half, q);
  const KernelKind k_half = make_profile_kernel(p_half);
  r.half_ratio_min = std::numeric_limits<double>::infinity();
  r.half_ratio_max = 0.0;
  for (double x : logspace(1e-3, 1e3, 40)) {
    const SpacetimePoint p({x}, 1.0);
    const double ratio = eval_kernel(k_half, p, half) / eval_kernel(HalfKernel{}, p, half);
    r.half_ratio_min = std::min(r.half_ratio_min, ratio);
    r.half_ratio_max = std::max(r.half_ratio_max, ratio);
  }
  const FracParams heat(1.0, 1);
  const auto p_heat = build_profile(heat, q);
  const KernelKind k_heat = make_profile_kernel(p_heat);
  for (double x : logspace(1e-3, 1e1, 40)) {
    const SpacetimePoint p({x}, 1.0);
    const double w = eval_kernel(GaussianKernel{}, p, heat);
    r.gaussian_max_rel_error = std::max(r.gaussian_max_rel_error, std::abs(eval_kernel(k_heat, p, heat) / w - 1.0));
  }
  for (double s : {0.3, 0.5, 0.75, 1.0}) {
    const auto prof = s == 0.5 ? p_half : (s == 1.0 ? p_heat : build_profile(FracParams(s, 1), q));
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(profile_mass(prof, t) - 1.0));
    r.normalization_s.push_back(s);
    r.normalization_error.push_back(worst);
  }
  Json j;
  j["experiment"] = "kernel-cross-checks";
  j["half_ratio_min"] = r.half_ratio_min;
  j["half_ratio_max"] = r.half_ratio_max;
  j["half_ratio_spread"] = r.half_ratio_max / r.half_ratio_min - 1.0;
  j["half_ratio_expected"] = 1.0 / std::numbers::pi;
  j["gaussian_max_rel_error"] = r.gaussian_max_rel_error;
  j["normalization_s"] = r.normalization_s;
  j["normalization_error"] = r.normalization_error;
  r.json = std::move(j);
  return r;
}

// ---------------------------------------------------------------------------
// Blumenthal-Getoor envelope

struct EnvelopeCheck {
  double s = 0.0;
  double ratio_min = 0.0, ratio_max = 0.0;
  double spread() const { return ratio_max / ratio_min; }
};

inline EnvelopeCheck envelope_check(double s, int n = 25, QuadratureSettings q = {}) {
  const FracParams params(s, 1);
  q.extrapolation_limit = std::numeric_limits<double>::infinity();
  const KernelKind prof = make_profile_kernel(build_profile(params, q));
  EnvelopeCheck r;
  r.s = s;
  r.ratio_min = std::numeric_limits<double>::infinity();
  for (double t : logspace(1e-3, 1e3, n))
    for (double x : logspace(1e-3, 1e3, n)) {
      const double ratio = radial_kernel(prof, x, t, params) / radial_kernel(BGEnvelopeKernel{}, x, t, params);
      r.ratio_min = std::min(r.ratio_min, ratio);
      r.ratio_max = std::max(r.ratio_max, ratio);
    }
  return r;
}

// ---------------------------------------------------------------------------
// Derivative decay ratios

struct DecayRatios {
  double value = 0.0, dt = 0.0, grad = 0.0;
  std::vector<double> alphas;
  std::vector<double> frac;
  double pde_max_rel_residual = 0.0;
  std::size_t pde_points = 0;
  Json json;
};

inline DecayRatios decay_ratios(double s = 0.75, int n = 10, const QuadratureSettings& settings = {}, int N = 1) {
  const FracParams params(s, N);
  // The grid reaches u = |x| t^{-1/2s} far past the table, where the power
  // tail is the asymptotic form itself.
  QuadratureSettings q = settings;
  q.extrapolation_limit = std::numeric_limits<double>::infinity();
  auto on_axis = [N](double x, double t) {
    std::vector<double> v(N, 0.0);
    v[0] = x;
    return SpacetimePoint(std::move(v), t);
  };
  const auto prof = build_profile(params, q);
  const KernelKind kind = make_profile_kernel(prof);
  DecayRatios r;
  r.alphas = {0.25, 0.5, 0.75};
  r.frac.assign(r.alphas.size(), 0.0);
  const auto xs = logspace(1e-2, 1e2, n);
  const auto ts = logspace(1e-2, 1e2, n);
  for (double x : xs)
    for (double t : ts) {
      const SpacetimePoint p = on_axis(x, t);
      const double norm = parabolic_norm(p, params);
      r.value = std::max(r.value, std::abs(eval_kernel(kind, p, params)) * std::pow(norm, N));
      r.dt = std::max(r.dt, std::abs(eval_kernel_dt(kind, p, params)) * std::pow(norm, N + 2.0 * s));
      r.grad = std::max(r.grad, std::abs(eval_kernel_gradient_x(kind, p, params)[0]) * std::pow(norm, N + 1.0));
      for (std::size_t a = 0; a < r.alphas.size(); ++a) {
        const double al = r.alphas[a];
        r.frac[a] = std::max(r.frac[a], std::abs(eval_kernel_frac_laplacian(kind, al, p, params)) *
                                            std::pow(norm, N + 2.0 * al));
      }
    }
  // PDE identity on a 5 x 4 block where both sides are well above the
  // quadrature floor. It needs (-Delta)^s with s < 1.
  const std::vector<double> pde_x = s < 1.0 ? std::vector<double>{0.1, 0.4, 0.8, 1.5, 3.0} : std::vector<double>{};
  for (double x : pde_x)
    for (double t : {0.5, 1.0, 1.5, 2.0}) {
      const SpacetimePoint p = on_axis(x, t);
      DerivativeOptions opt;
      opt.check_consistency = false;
      const double lhs = eval_kernel_dt(kind, p, params, opt);
      const double rhs = -eval_kernel_frac_laplacian(kind, s, p, params);
      r.pde_max_rel_residual = std::max(r.pde_max_rel_residual, std::abs(lhs - rhs) / std::abs(rhs));
      ++r.pde_points;
    }
  Json j;
  j["experiment"] = "decay-ratios";
  j["s"] = s;
  j["N"] = N;
  j["max_value_ratio"] = r.value;
  j["max_dt_ratio"] = r.dt;
  j["max_grad_ratio"] = r.grad;
  j["alphas"] = r.alphas;
  j["max_frac_laplacian_ratio"] = r.frac;
  j["pde_points"] = r.pde_points;
  j["pde_max_rel_residual"] = r.pde_max_rel_residual;
  r.json = std::move(j);
  return r;
}

/// Profile build plus the checks that apply to (s, N): ratio to the s = 1/2
/// kernel, to the Gaussian at s = 1, unit mass for N = 1, decay ratios.
struct KernelTable {
  KernelProfile profile;
  Json json;
};

inline KernelTable kernel_table(const FracParams& params, const QuadratureSettings& q = {}, int decay_points = 10) {
  KernelTable r;
  r.profile = build_profile(params, q);
  const KernelKind kind = make_profile_kernel(r.profile);
  Json j;
  j["experiment"] = "kernel-table";
  j["s"] = params.s;
  j["N"] = params.N;
  j["normalization"] = to_string(r.profile.normalization());
  j["nodes"] = r.profile.grid().size();
  j["u_max"] = r.profile.u_max();
  j["phi_0"] = r.profile.values().front();
  j["tail_coefficient"] = r.profile.gaussian_limit() ? Json(nullptr) : Json(r.profile.tail_coefficient());
  auto axis = [&](double x) {
    std::vector<double> v(params.N, 0.0);
    v[0] = x;
    return SpacetimePoint(std::move(v), 1.0);
  };
  if (params.is_half()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double x : logspace(1e-3, 1e3, 40)) {
      const auto p = axis(x);
      const double ratio = eval_kernel(kind, p, params) / eval_kernel(HalfKernel{}, p, params);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    const double expected = std::tgamma(0.5 * (params.N + 1)) / std::pow(std::numbers::pi, 0.5 * (params.N + 1));
    j["half_ratio_min"] = lo;
    j["half_ratio_max"] = hi;
    j["half_ratio_expected"] = expected;
  }
  if (params.s == 1.0) {
    double worst = 0.0;
    for (double x : logspace(1e-3, 1e1, 40)) {
      const auto p = axis(x);
      worst = std::max(worst, std::abs(eval_kernel(kind, p, params) / eval_kernel(GaussianKernel{}, p, params) - 1.0));
    }
    j["gaussian_max_rel_error"] = worst;
  }
  if (params.N == 1) j["mass_at_t1"] = profile_mass(r.profile, 1.0);
  j["decay"] = decay_ratios(params.s, decay_points, q, params.N).json;
  r.json = std::move(j);
  return r;
}

// ---------------------------------------------------------------------------
// Cantor experiments

struct CantorDataCheck {
  int k = 0;
  bool exact = false;
  double growth = 0.0;
};

/// Generation k against the closed forms: 2^{k(N+1)} cubes of side
/// 2^{-k(N+1)/N} and mass 2^{-k(N+1)}; growth constant in degree N.
inline std::vector<CantorDataCheck> cantor_data_checks(int kmax = 6, int N = 1) {
  std::vector<CantorDataCheck> out;
  const FracParams params(0.5, N);
  for (int k = 0; k <= kmax; ++k) {
    CantorSpec spec;
    spec.N = N;
    spec.generation = k;
    const auto g = cantor_generation(spec);
    const double side = std::exp2(-static_cast<double>(k) * (N + 1) / N);
    const double w = std::ldexp(1.0, -k * (N + 1));
    bool ok = g.cubes.size() == (std::size_t{1} << (k * (N + 1))) && g.measure.size() == g.cubes.size();
    for (const auto& q : g.cubes) ok = ok && q.spatial_side == side && q.time_length == side;
    for (double v : g.measure.weights()) ok = ok && v == w;
    out.push_back({k, ok, growth_constant(g.measure, N, params)});
  }
  return out;
}

struct CantorDecayLevel {
  int k = 0;
  CapacityEstimate estimate;
};

/// Half-mode LP on generation k: one atom per cube center, constraint grid
/// on [-1/4, 5/4]^2 with spacing half the cube side, exclusion radius half
/// the cube side (the cube itself in the parabolic metric).
inline std::vector<CantorDecayLevel> cantor_decay(int kmax = 4) {
  std::vector<CantorDecayLevel> out;
  for (int k = 1; k <= kmax; ++k) {
    CantorSpec spec;
    spec.generation = k;
    const auto g = cantor_generation(spec);
    const double side = spec.side();
    const int res = 3 * (1 << (2 * k)) + 1;
    CapacityOptions o;
    o.grid = GridSpec::box2(-0.25, 1.25, -0.25, 1.25, res, res, 0.5 * side);
    out.push_back({k, capacity_lower(UnionOfCubes{g.cubes}, CapacityMode::half, FracParams(0.5, 1), 0, o)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Localization

struct LocalizationResult {
  std::vector<double> constants;  // one per (trial, level)
  double c_loc = 0.0;
  std::vector<int> resolutions;
  Json json;
};

/// Smooth random signed density on a lattice of the unit square, as atoms.
inline SignedDiscreteMeasure random_smooth_signed_measure(int per_axis, unsigned seed, int modes = 4) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> G(0.0, 1.0);
  std::vector<double> c(modes * modes), phase_x(modes * modes), phase_t(modes * modes);
  std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
  for (int a = 0; a < modes * modes; ++a) {
    const int i = a / modes, j = a % modes;
    c[a] = G(gen) / (1.0 + i + j);
    phase_x[a] = U(gen);
    phase_t[a] = U(gen);
  }
  const double h = 1.0 / per_axis;
  std::vector<SpacetimePoint> atoms;
  std::vector<double> w;
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j) {
      const double x = (i + 0.5) * h, t = (j + 0.5) * h;
      double dens = 0.0;
      for (int a = 0; a < modes * modes; ++a) {
        const int p = a / modes, q = a % modes;
        dens += c[a] * std::cos(std::numbers::pi * p * x + phase_x[a]) * std::cos(std::numbers::pi * q * t + phase_t[a]);
      }
      atoms.emplace_back(std::vector<double>{x}, t);
      w.push_back(dens * h * h);
    }
  return {1, std::move(atoms), std::move(w)};
}

inline LocalizationResult localization(int trials = 20, unsigned seed = 7, int per_axis = 24,
                                       std::vector<int> resolutions = {41, 81, 161}) {
  const FracParams params(0.5, 1);
  const KernelKind kind = HalfKernel{};
  const double rho = 0.25 / per_axis;
  const auto bump = standard_bump(ParabolicCube::make({0.0}, 1.0, 0.0, params));
  LocalizationResult r;
  r.resolutions = resolutions;
  for (int trial = 0; trial < trials; ++trial) {
    const auto nu = random_smooth_signed_measure(per_axis, seed + 1000u * trial);
    const auto localized = apply_bump(nu, bump);
    for (int res : resolutions) {
      const auto grid = GridSpec::box2(-0.5, 1.5, -0.5, 1.5, res, res, rho);
      const double base = sup_norm_on_grid(nu, kind, grid, params);
      const double loc = sup_norm_on_grid(localized, kind, grid, params);
      r.constants.push_back(loc / base);
    }
  }
  r.c_loc = *std::max_element(r.constants.begin(), r.constants.end());
  auto sorted = r.constants;
  std::sort(sorted.begin(), sorted.end());
  Json j;
  j["experiment"] = "localization";
  j["trials"] = trials;
  j["resolutions"] = resolutions;
  j["exclusion"] = rho;
  j["c_loc"] = r.c_loc;
  j["median"] = sorted[sorted.size() / 2];
  j["min"] = sorted.front();
  j["constants"] = r.constants;
  r.json = std::move(j);
  return r;
}

// ---------------------------------------------------------------------------
// Growth implies regularity (s = 0.75)

struct RegularityResult {
  double growth_before = 0.0;
  double lip = 0.0;
  double bmo = 0.0;
  std::size_t pairs = 0;
  std::size_t cubes = 0;
  Json json;
};

struct RegularityConfig {
  double s = 0.75;
  int generation = 3;
  std::size_t pairs = 300;
  std::size_t cubes = 50;
  int nodes_per_cube = 64;
  unsigned seed = 11;
  double window = 20.0;
  double mesh = 1e-3;
};

inline RegularityResult growth_regularity(const RegularityConfig& cfg = {}) {
  const FracParams params(cfg.s, 1);
  const double d = params.critical_dimension();
  const double alpha = 1.0 - 1.0 / (2.0 * cfg.s);
  CantorSpec spec;
  spec.generation = cfg.generation;
  const auto g = cantor_generation(spec);
  RegularityResult r;
  r.growth_before = growth_constant(g.measure, d, params);
  const DiscreteMeasure mu = g.measure.scaled(1.0 / r.growth_before);
  // Points just above an atom probe the far tail of the profile.
  QuadratureSettings q;
  q.extrapolation_limit = std::numeric_limits<double>::infinity();
  const KernelKind kind = make_profile_kernel(build_profile(params, q));
  const SpacetimeSampler pot = [&](const SpacetimePoint& p) { return potential(mu, kind, Plain{}, p, params); };

  // Lip(alpha) in t: x away from the atoms' spatial coordinates.
  std::vector<double> atom_x;
  std::vector<double> atom_t;
  for (const auto& a : mu.atoms()) {
    atom_x.push_back(a.x[0]);
    atom_t.push_back(a.t);
  }
  const double margin = 0.5 * spec.side();
  std::mt19937 gen(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<LipPair> pairs;
  while (pairs.size() < cfg.pairs) {
    const double x = -0.25 + 1.5 * U(gen);
    bool ok = true;
    for (double ax : atom_x) ok = ok && std::abs(x - ax) >= margin;
    if (!ok) continue;
    const double t = -0.5 + 2.0 * U(gen);
    const double gap = std::exp(std::log(1e-3) + U(gen) * (std::log(1.0) - std::log(1e-3)));
    pairs.push_back({SpacetimePoint({x}, t), SpacetimePoint({x}, t + gap)});
  }
  r.pairs = pairs.size();
  r.lip = lip_norm_t(pot, alpha, pairs);

  // BMO of the fractional time derivative of the potential.
  FracDerivativeOptions fopt;
  fopt.decay = 1.0 / (2.0 * cfg.s);
  fopt.breakpoints = atom_t;
  const SpacetimeSampler dfrac = [&](const SpacetimePoint& p) {
    const TimeSampler line = [&](double tau) { return pot(SpacetimePoint(p.x, tau)); };
    return frac_time_derivative(line, p.t, alpha, cfg.window, cfg.mesh, fopt).value;
  };
  Box box{{0.0, 0.0}, {1.0, 1.0}};
  const auto cubes = random_parabolic_cubes(cfg.cubes, box, params, cfg.seed + 1);
  r.cubes = cubes.size();
  r.bmo = bmo_parabolic_norm(dfrac, cubes, cfg.nodes_per_cube);
  Json j;
  j["experiment"] = "growth-regularity";
  j["s"] = cfg.s;
  j["alpha"] = alpha;
  j["generation"] = cfg.generation;
  j["growth_constant_before_rescale"] = r.growth_before;
  j["lip_pairs"] = r.pairs;
  j["lip_estimate"] = r.lip;
  j["bmo_cubes"] = r.cubes;
  j["nodes_per_cube"] = cfg.nodes_per_cube;
  j["bmo_estimate"] = r.bmo;
  r.json = std::move(j);
  return r;
}

// ---------------------------------------------------------------------------
// F_s tail bound

struct TailBoundResult {
  std::vector<double> t;
  std::vector<double> value;
  std::vector<double> error;
  double constant = 0.0;
  Json json;
};

inline TailBoundResult fs_tail_bound(double s = 0.75, int samples = 30, double window = 50.0, double mesh = 1e-3) {
  const FracParams params(s, 1);
  const auto prof = build_profile(params);
  const double alpha = 1.0 - 1.0 / (2.0 * s);
  const TimeSampler F = [&](double u) { return profile_F(prof, u); };
  FracDerivativeOptions opt;
  opt.decay = 1.0 / (2.0 * s);
  opt.breakpoints = {0.0};
  TailBoundResult r;
  for (int i = 0; i < samples; ++i) {
    const double t = -10.0 + 20.0 * (i + 0.5) / samples;
    const auto d = frac_time_derivative(F, t, alpha, window, mesh, opt);
    r.t.push_back(t);
    r.value.push_back(d.value);
    r.error.push_back(d.error);
    r.constant = std::max(r.constant, std::abs(d.value) * std::max(1.0, std::abs(t)));
  }
  Json j;
  j["experiment"] = "fs-tail-bound";
  j["s"] = s;
  j["alpha"] = alpha;
  j["t"] = r.t;
  j["value"] = r.value;
  j["error"] = r.error;
  j["constant"] = r.constant;
  r.json = std::move(j);
  return r;
}

}  // namespace fraccap::experiments

#endif
