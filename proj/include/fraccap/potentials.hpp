#ifndef FRACCAP_POTENTIALS_HPP
#define FRACCAP_POTENTIALS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fraccap/errors.hpp"
#include "fraccap/geometry.hpp"
#include "fraccap/kernels.hpp"
#include "fraccap/measures.hpp"
#include "fraccap/parallel.hpp"
#include "fraccap/quadrature.hpp"

namespace fraccap {

// ---------------------------------------------------------------------------
// Grids

/// Tensor grid over a box in R^{N+1} (time last). Node i_k along axis k sits
/// at lo_k + i_k (hi_k - lo_k) / (res_k - 1); nodes are ordered
/// lexicographically with the first axis outermost. Nodes closer than
/// `exclusion` (parabolic distance, strict) to an atom are skipped.
struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  std::vector<int> resolution;
  double exclusion = 0.0;

  static GridSpec box2(double x0, double x1, double t0, double t1, int nx, int nt, double rho) {
    return GridSpec{{x0, t0}, {x1, t1}, {nx, nt}, rho};
  }

  int axes() const { return static_cast<int>(lo.size()); }

  void validate(int N) const {
    if (lo.size() != static_cast<std::size_t>(N) + 1 || hi.size() != lo.size() || resolution.size() != lo.size())
      throw std::invalid_argument("GridSpec: expected N + 1 axes");
    for (std::size_t k = 0; k < lo.size(); ++k) {
      if (resolution[k] < 2) throw std::invalid_argument("GridSpec: resolution must be >= 2 per axis");
      if (!(hi[k] > lo[k])) throw std::invalid_argument("GridSpec: degenerate box");
    }
    if (!(exclusion >= 0.0)) throw std::invalid_argument("GridSpec: exclusion must be >= 0");
  }

  std::size_t node_count() const {
    std::size_t n = 1;
    for (int r : resolution) n *= static_cast<std::size_t>(r);
    return n;
  }

  double coordinate(int axis, int i) const {
    return lo[axis] + i * (hi[axis] - lo[axis]) / (resolution[axis] - 1);
  }

  SpacetimePoint node(std::size_t index) const {
    const int A = axes();
    std::vector<double> c(A);
    for (int k = A - 1; k >= 0; --k) {
      const int i = static_cast<int>(index % resolution[k]);
      index /= resolution[k];
      c[k] = coordinate(k, i);
    }
    const double t = c.back();
    c.pop_back();
    return {std::move(c), t};
  }

  /// Refinement factor per axis; res -> 2 res - 1 keeps every old node.
  GridSpec refined(int times = 1) const {
    GridSpec g = *this;
    for (int k = 0; k < times; ++k)
      for (int& r : g.resolution) r = 2 * r - 1;
    return g;
  }
};

// ---------------------------------------------------------------------------
// Potentials

struct Plain {};
/// Drops atoms with dist_p(p, a) <= eps.
struct Truncated {
  double eps = 0.0;
};
/// Kernel argument reflected: sum w K(a - p).
struct Dual {};
/// max over the eps grid of |Truncated(eps)|.
struct Maximal {
  std::vector<double> eps_grid;
};

using PotentialVariant = std::variant<Plain, Truncated, Dual, Maximal>;

struct PotentialValue {
  double value = 0.0;
  /// Atoms sitting exactly at the evaluation point; their contribution is
  /// excluded, never evaluated.
  std::size_t coincident = 0;
};

namespace detail {

inline double kernel_between(const KernelKind& kind, const SpacetimePoint& p, const SpacetimePoint& a,
                             const FracParams& params, bool dual) {
  const double rho = spatial_distance(p.x.data(), a.x.data(), params.N);
  const double t = dual ? a.t - p.t : p.t - a.t;
  return radial_kernel(kind, rho, t, params);
}

}  // namespace detail

inline PotentialValue potential_detail(const SignedDiscreteMeasure& mu, const KernelKind& kind,
                                       const PotentialVariant& variant, const SpacetimePoint& p,
                                       const FracParams& params) {
  detail::require_dim(p, params, "potential");
  if (mu.dim() != params.N) throw std::invalid_argument("potential: measure dimension mismatch");
  check_consistent(kind, params);
  const auto& atoms = mu.atoms();
  const auto& w = mu.weights();
  PotentialValue out;
  if (const auto* m = std::get_if<Maximal>(&variant)) {
    if (m->eps_grid.empty()) throw std::invalid_argument("potential: empty eps grid");
    for (double e : m->eps_grid)
      if (!(e > 0.0)) throw std::invalid_argument("potential: eps must be positive");
    // One pass: bucket contributions by distance, then sweep eps.
    std::vector<std::pair<double, double>> contrib;
    contrib.reserve(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double d = dist_p(p, atoms[i], params);
      if (d == 0.0) {
        ++out.coincident;
        continue;
      }
      contrib.emplace_back(d, w[i] * detail::kernel_between(kind, p, atoms[i], params, false));
    }
    double best = 0.0;
    for (double e : m->eps_grid) {
      double acc = 0.0;
      for (const auto& [d, c] : contrib)
        if (d > e) acc += c;
      best = std::max(best, std::abs(acc));
    }
    out.value = best;
    return out;
  }
  const bool dual = std::holds_alternative<Dual>(variant);
  double eps = -1.0;
  if (const auto* tr = std::get_if<Truncated>(&variant)) {
    if (!(tr->eps > 0.0)) throw std::invalid_argument("potential: eps must be positive");
    eps = tr->eps;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i] == p) {
      ++out.coincident;
      continue;
    }
    if (eps > 0.0 && dist_p(p, atoms[i], params) <= eps) continue;
    acc += w[i] * detail::kernel_between(kind, p, atoms[i], params, dual);
  }
  out.value = acc;
  return out;
}

inline double potential(const SignedDiscreteMeasure& mu, const KernelKind& kind, const PotentialVariant& variant,
                        const SpacetimePoint& p, const FracParams& params) {
  return potential_detail(mu, kind, variant, p, params).value;
}

/// Quantiles of the sorted pairwise distances, used as the eps grid of the
/// maximal potential (it is piecewise constant in eps between distances).
inline std::vector<double> default_epsilon_grid(const SignedDiscreteMeasure& mu, const FracParams& params,
                                                std::size_t count = 21) {
  auto d = detail::pairwise_distances(mu, params);
  d.erase(std::remove(d.begin(), d.end(), 0.0), d.end());
  if (d.empty()) return {1.0};
  std::sort(d.begin(), d.end());
  std::vector<double> g;
  for (std::size_t q = 0; q < count; ++q) {
    const double pos = count == 1 ? 0.0 : static_cast<double>(q) / (count - 1);
    g.push_back(d[static_cast<std::size_t>(std::llround(pos * (d.size() - 1)))]);
  }
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// ---------------------------------------------------------------------------
// Grid sup norm

struct GridEvaluation {
  /// Potential per node; NaN where the node is excluded.
  std::vector<double> values;
  double sup = 0.0;
  std::size_t argmax = 0;
  std::size_t evaluated = 0;
};

namespace detail {

inline bool node_excluded(const SpacetimePoint& node, const SignedDiscreteMeasure& mu, double rho,
                          const FracParams& params) {
  if (rho <= 0.0) return false;
  for (const auto& a : mu.atoms())
    if (dist_p(node, a, params) < rho) return true;
  return false;
}

}  // namespace detail

inline GridEvaluation evaluate_on_grid(const SignedDiscreteMeasure& mu, const KernelKind& kind,
                                       const GridSpec& grid, const FracParams& params, bool dual = false) {
  grid.validate(params.N);
  check_consistent(kind, params);
  const std::size_t n = grid.node_count();
  GridEvaluation ev;
  ev.values.assign(n, std::numeric_limits<double>::quiet_NaN());
  const PotentialVariant variant = dual ? PotentialVariant{Dual{}} : PotentialVariant{Plain{}};
  parallel_for(n, [&](std::size_t i) {
    const SpacetimePoint node = grid.node(i);
    if (detail::node_excluded(node, mu, grid.exclusion, params)) return;
    ev.values[i] = potential(mu, kind, variant, node, params);
  });
  ev.sup = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(ev.values[i])) continue;
    ++ev.evaluated;
    if (std::abs(ev.values[i]) > ev.sup) {
      ev.sup = std::abs(ev.values[i]);
      ev.argmax = i;
    }
  }
  if (ev.evaluated == 0) throw std::invalid_argument("sup_norm_on_grid: every grid node is excluded");
  return ev;
}

/// max |potential| over grid nodes outside the exclusion balls.
inline double sup_norm_on_grid(const SignedDiscreteMeasure& mu, const KernelKind& kind, const GridSpec& grid,
                               const FracParams& params, bool dual = false) {
  return evaluate_on_grid(mu, kind, grid, params, dual).sup;
}

/// CSV with header x_1,...,x_N,t,value; excluded nodes carry "nan".
inline void write_grid_csv(std::ostream& os, const GridSpec& grid, const std::vector<double>& values) {
  if (values.size() != grid.node_count()) throw std::invalid_argument("write_grid_csv: size mismatch");
  const int N = grid.axes() - 1;
  for (int i = 1; i <= N; ++i) os << "x_" << i << ',';
  os << "t,value\n";
  char buf[64];
  for (std::size_t k = 0; k < values.size(); ++k) {
    const auto p = grid.node(k);
    for (double v : p.x) {
      std::snprintf(buf, sizeof buf, "%.17g,", v);
      os << buf;
    }
    if (std::isnan(values[k]))
      std::snprintf(buf, sizeof buf, "%.17g,nan\n", p.t);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.t, values[k]);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// L2(mu) operator norm

struct PowerIterationOptions {
  double tol = 1e-8;
  int max_iterations = 10'000;
  unsigned seed = 20240601u;
};

/// Norm of f -> sum_j K(a_i - a_j) [dist_p > eps] w_j f(a_j) on L^2(mu), i.e.
/// the top singular value of D^{1/2} A D^{1/2}, by power iteration on B^T B.
inline double l2_operator_norm(const DiscreteMeasure& mu, const KernelKind& kind, double eps,
                               const FracParams& params, const PowerIterationOptions& opt = {}) {
  if (!(eps > 0.0)) throw std::invalid_argument("l2_operator_norm: eps must be positive");
  if (mu.dim() != params.N) throw std::invalid_argument("l2_operator_norm: dimension mismatch");
  check_consistent(kind, params);
  const std::size_t n = mu.size();
  if (n < 2) return 0.0;
  const auto& a = mu.atoms();
  std::vector<double> sw(n);
  for (std::size_t i = 0; i < n; ++i) sw[i] = std::sqrt(mu.weights()[i]);
  std::vector<double> B(n * n, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || dist_p(a[i], a[j], params) <= eps) continue;
      const double k = detail::kernel_between(kind, a[i], a[j], params, false);
      B[i * n + j] = sw[i] * k * sw[j];
      any = any || k != 0.0;
    }
  if (!any) return 0.0;

  std::mt19937 gen(opt.seed);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  std::vector<double> v(n), Bv(n), w(n);
  for (double& x : v) x = U(gen);
  auto normalize = [](std::vector<double>& x) {
    double s = 0.0;
    for (double y : x) s += y * y;
    s = std::sqrt(s);
    if (s > 0.0)
      for (double& y : x) y /= s;
    return s;
  };
  normalize(v);
  double lambda_prev = -1.0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += B[i * n + j] * v[j];
      Bv[i] = acc;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) w[j] += B[i * n + j] * Bv[i];
    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) lambda += v[i] * w[i];
    if (normalize(w) == 0.0) return 0.0;
    v.swap(w);
    if (lambda_prev >= 0.0 && std::abs(lambda - lambda_prev) <= opt.tol * lambda) return std::sqrt(lambda);
    lambda_prev = lambda;
  }
  throw NonConvergence("l2_operator_norm: power iteration did not converge");
}

// ---------------------------------------------------------------------------
// BMO and Lipschitz estimators

using SpacetimeSampler = std::function<double(const SpacetimePoint&)>;

struct BmoReport {
  double value = 0.0;
  std::size_t argmax = 0;
  std::vector<double> per_cube;
};

/// Sampled mean oscillation: each cube carries a cell-centered lattice with
/// round(nodes^{1/(N+1)}) points per axis.
inline BmoReport bmo_report(const SpacetimeSampler& f, const std::vector<ParabolicCube>& cubes, int nodes_per_cube) {
  if (cubes.empty()) throw std::invalid_argument("bmo_parabolic_norm: empty cube family");
  if (nodes_per_cube < 1) throw std::invalid_argument("bmo_parabolic_norm: nodes_per_cube must be >= 1");
  const int N = static_cast<int>(cubes.front().spatial_corner.size());
  const int m = std::max(1, static_cast<int>(std::lround(std::pow(nodes_per_cube, 1.0 / (N + 1)))));
  std::size_t total = 1;
  for (int k = 0; k <= N; ++k) total *= m;
  BmoReport rep;
  rep.per_cube.assign(cubes.size(), 0.0);
  parallel_for(cubes.size(), [&](std::size_t c) {
    const auto& q = cubes[c];
    std::vector<double> vals(total);
    std::vector<int> idx(N + 1, 0);
    for (std::size_t n = 0; n < total; ++n) {
      std::size_t r = n;
      for (int k = N; k >= 0; --k) {
        idx[k] = static_cast<int>(r % m);
        r /= m;
      }
      SpacetimePoint p;
      p.x.resize(N);
      for (int k = 0; k < N; ++k) p.x[k] = q.spatial_corner[k] + (idx[k] + 0.5) * q.spatial_side / m;
      p.t = q.time_start + (idx[N] + 0.5) * q.time_length / m;
      vals[n] = f(p);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(total);
    double dev = 0.0;
    for (double v : vals) dev += std::abs(v - mean);
    rep.per_cube[c] = dev / static_cast<double>(total);
  });
  for (std::size_t c = 0; c < cubes.size(); ++c)
    if (rep.per_cube[c] > rep.value) {
      rep.value = rep.per_cube[c];
      rep.argmax = c;
    }
  return rep;
}

inline double bmo_parabolic_norm(const SpacetimeSampler& f, const std::vector<ParabolicCube>& cubes,
                                 int nodes_per_cube) {
  return bmo_report(f, cubes, nodes_per_cube).value;
}

/// Random s-parabolic cubes with side log-uniform in [side_lo, side_hi],
/// placed uniformly so that they stay inside the box when they fit.
inline std::vector<ParabolicCube> random_parabolic_cubes(std::size_t count, const Box& box, const FracParams& params,
                                                         unsigned seed, double side_lo = 1e-2, double side_hi = 1.0) {
  if (box.lo.size() != static_cast<std::size_t>(params.N) + 1)
    throw std::invalid_argument("random_parabolic_cubes: box must have N + 1 axes");
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<ParabolicCube> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    const double side = std::exp(std::log(side_lo) + U(gen) * (std::log(side_hi) - std::log(side_lo)));
    std::vector<double> corner(params.N);
    for (int k = 0; k < params.N; ++k) corner[k] = box.lo[k] + U(gen) * std::max(0.0, box.hi[k] - box.lo[k] - side);
    auto q = ParabolicCube::make(std::move(corner), side, 0.0, params);
    q.time_start = box.lo[params.N] + U(gen) * std::max(0.0, box.hi[params.N] - box.lo[params.N] - q.time_length);
    out.push_back(std::move(q));
  }
  return out;
}

using TimeSampler = std::function<double(double)>;

struct FracDerivativeOptions {
  /// |f(t)| ~ |t|^{-decay} beyond the window; needed when the window cut
  /// would otherwise leave more than `tol` unaccounted for.
  std::optional<double> decay;
  std::optional<double> lipschitz;
  /// Points where f has kinks; panels are split there.
  std::vector<double> breakpoints;
  double tol = 1e-6;
  double panel_ratio = 1.25;
  int gauss_points = 10;
};

struct FracDerivative {
  double value = 0.0;
  double error = 0.0;
};

/// Integral of (f(tau) - f(t0)) / |tau - t0|^{1+alpha} over the real line.
/// Quadrature runs over geometric panels in r = |tau - t0| from `mesh` to
/// `window` on both sides. The inner part r < mesh is dropped and bounded by
/// 2 Lip mesh^{1-alpha} / (1 - alpha); the outer part uses the exact
/// integral of the constant term and the declared decay for f itself.
inline FracDerivative frac_time_derivative(const TimeSampler& f, double t0, double alpha, double window, double mesh,
                                           const FracDerivativeOptions& opt = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("frac_time_derivative: alpha must lie in (0, 1)");
  if (!(window > mesh && mesh > 0.0)) throw std::invalid_argument("frac_time_derivative: need 0 < mesh < window");
  const double f0 = f(t0);
  const quad::GaussLegendre gl(opt.gauss_points);
  const quad::GaussLegendre gl_low(opt.gauss_points / 2);

  std::vector<double> cuts;
  for (double r = mesh; r < window; r *= opt.panel_ratio) cuts.push_back(r);
  cuts.push_back(window);
  FracDerivative out;
  double quad_err = 0.0;
  for (int side : {-1, 1}) {
    std::vector<double> c(cuts);
    for (double b : opt.breakpoints) {
      const double r = side * (b - t0);
      if (r > mesh && r < window) c.push_back(r);
    }
    std::sort(c.begin(), c.end());
    auto g = [&](double r) { return (f(t0 + side * r) - f0) / std::pow(r, 1.0 + alpha); };
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      if (c[i + 1] <= c[i]) continue;
      const double hi = gl.integrate(g, c[i], c[i + 1]);
      out.value += hi;
      quad_err += std::abs(hi - gl_low.integrate(g, c[i], c[i + 1]));
    }
  }

  // Constant part of the tails is exact.
  out.value += -f0 * 2.0 * std::pow(window, -alpha) / alpha;
  double tail_f = 0.0;
  double tail_bound = 0.0;
  for (int side : {-1, 1}) {
    const double fe = f(t0 + side * window);
    if (opt.decay) {
      tail_f += fe * std::pow(window, -alpha) / (*opt.decay + alpha);
    } else {
      tail_bound += std::abs(fe) * std::pow(window, -alpha) / alpha;
    }
  }
  if (!opt.decay && tail_bound > opt.tol)
    throw std::invalid_argument("frac_time_derivative: declare a decay exponent, window truncation exceeds tolerance");
  out.value += tail_f;

  double lip = 0.0;
  if (opt.lipschitz) {
    lip = *opt.lipschitz;
  } else {
    for (double h : {mesh, 0.5 * mesh, 0.25 * mesh})
      for (int side : {-1, 1}) lip = std::max(lip, std::abs(f(t0 + side * h) - f0) / h);
    lip *= 2.0;
  }
  out.error = 2.0 * lip * std::pow(mesh, 1.0 - alpha) / (1.0 - alpha) + quad_err + tail_bound;
  return out;
}

struct LipPair {
  SpacetimePoint a;
  SpacetimePoint b;
};

/// max |f(a) - f(b)| / |t_a - t_b|^alpha over pairs sharing the spatial part.
inline double lip_norm_t(const SpacetimeSampler& f, double alpha, const std::vector<LipPair>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("lip_norm_t: empty pair list");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("lip_norm_t: alpha must lie in (0, 1)");
  for (const auto& pr : pairs) {
    if (pr.a.x != pr.b.x) throw std::invalid_argument("lip_norm_t: pair with different spatial parts");
    if (pr.a.t == pr.b.t) throw std::invalid_argument("lip_norm_t: pair with equal times");
  }
  std::vector<double> q(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto& pr = pairs[i];
    q[i] = std::abs(f(pr.a) - f(pr.b)) / std::pow(std::abs(pr.a.t - pr.b.t), alpha);
  });
  return *std::max_element(q.begin(), q.end());
}

// ---------------------------------------------------------------------------
// Bumps

/// Product of smoothstep hats over the N + 1 axes of a cube: 1 on the
/// concentric half cube, 0 outside the cube, C^1 in between.
struct BumpFunction {
  ParabolicCube cube;
  int order = 1;

  static double beta(double v) {
    const double a = std::abs(v);
    if (a <= 0.5) return 1.0;
    if (a >= 1.0) return 0.0;
    const double y = 2.0 * (1.0 - a);
    return y * y * (3.0 - 2.0 * y);
  }
  static double beta_prime(double v) {
    const double a = std::abs(v);
    if (a <= 0.5 || a >= 1.0) return 0.0;
    const double y = 2.0 * (1.0 - a);
    return (v > 0 ? -2.0 : 2.0) * 6.0 * y * (1.0 - y);
  }

  /// Bound c with |grad_x phi| <= c / l and |d_t phi| <= c / l^{2s}.
  static constexpr double admissibility_constant() { return 6.0; }

  double operator()(const SpacetimePoint& p) const {
    const int N = static_cast<int>(cube.spatial_corner.size());
    double v = 1.0;
    for (int k = 0; k < N && v > 0.0; ++k) {
      const double c = cube.spatial_corner[k] + 0.5 * cube.spatial_side;
      v *= beta(2.0 * (p.x[k] - c) / cube.spatial_side);
    }
    const double tc = cube.time_start + 0.5 * cube.time_length;
    return v * beta(2.0 * (p.t - tc) / cube.time_length);
  }

  std::vector<double> gradient_x(const SpacetimePoint& p) const {
    const int N = static_cast<int>(cube.spatial_corner.size());
    std::vector<double> vals(N + 1), ders(N + 1);
    for (int k = 0; k < N; ++k) {
      const double v = 2.0 * (p.x[k] - cube.spatial_corner[k] - 0.5 * cube.spatial_side) / cube.spatial_side;
      vals[k] = beta(v);
      ders[k] = beta_prime(v) * 2.0 / cube.spatial_side;
    }
    vals[N] = beta(2.0 * (p.t - cube.time_start - 0.5 * cube.time_length) / cube.time_length);
    std::vector<double> g(N, 0.0);
    for (int k = 0; k < N; ++k) {
      double prod = ders[k];
      for (int j = 0; j <= N; ++j)
        if (j != k) prod *= vals[j];
      g[k] = prod;
    }
    return g;
  }

  double dt(const SpacetimePoint& p) const {
    const int N = static_cast<int>(cube.spatial_corner.size());
    double v = 1.0;
    for (int k = 0; k < N; ++k)
      v *= beta(2.0 * (p.x[k] - cube.spatial_corner[k] - 0.5 * cube.spatial_side) / cube.spatial_side);
    const double u = 2.0 * (p.t - cube.time_start - 0.5 * cube.time_length) / cube.time_length;
    return v * beta_prime(u) * 2.0 / cube.time_length;
  }
};

inline BumpFunction standard_bump(const ParabolicCube& q) { return BumpFunction{q, 1}; }

/// Weights multiplied by the bump; atoms where it vanishes are dropped.
inline SignedDiscreteMeasure apply_bump(const SignedDiscreteMeasure& nu, const BumpFunction& bump) {
  if (bump.cube.spatial_corner.size() != static_cast<std::size_t>(nu.dim()))
    throw std::invalid_argument("apply_bump: dimension mismatch");
  std::vector<SpacetimePoint> atoms;
  std::vector<double> w;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    const double v = nu.weights()[i] * bump(nu.atoms()[i]);
    if (v == 0.0) continue;
    atoms.push_back(nu.atoms()[i]);
    w.push_back(v);
  }
  return {nu.dim(), std::move(atoms), std::move(w)};
}

}  // namespace fraccap

#endif
