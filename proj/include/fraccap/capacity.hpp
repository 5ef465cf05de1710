#ifndef FRACCAP_CAPACITY_HPP
#define FRACCAP_CAPACITY_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "fraccap/errors.hpp"
#include "fraccap/geometry.hpp"
#include "fraccap/kernels.hpp"
#include "fraccap/measures.hpp"
#include "fraccap/parallel.hpp"
#include "fraccap/potentials.hpp"
#include "fraccap/simplex.hpp"

namespace fraccap {

enum class CapacityMode { half, tilde, growth_s };

inline const char* to_string(CapacityMode m) {
  switch (m) {
    case CapacityMode::half: return "half";
    case CapacityMode::tilde: return "tilde";
    default: return "growth_s";
  }
}

inline CapacityMode parse_capacity_mode(const std::string& s) {
  if (s == "half") return CapacityMode::half;
  if (s == "tilde") return CapacityMode::tilde;
  if (s == "growth_s") return CapacityMode::growth_s;
  throw std::invalid_argument("unknown capacity mode: " + s);
}

struct CapacityOptions {
  /// Constraint grid (half / tilde).
  std::optional<GridSpec> grid;
  /// Defaults to twice the resolution and half the exclusion of `grid`.
  std::optional<GridSpec> verify_grid;
  /// Ball-family size per center (growth_s): radii are this many quantiles of
  /// the pairwise distances, plus the diameter.
  std::size_t radius_quantiles = 64;
  double tol = 1e-6;
  std::size_t max_rows = 5000;
  std::size_t max_cols = 2000;
  /// Rows added per constraint-generation round.
  std::size_t rows_per_round = 200;
  double violation_tol = 1e-9;
  int content_depth = 10;
  ContentMetric content_metric = ContentMetric::parabolic;
  AtomPlacement placement = AtomPlacement::center;
};

struct CapacityEstimate {
  double lower = 0.0;
  double upper = 0.0;
  CapacityMode mode = CapacityMode::half;
  FracParams params;
  std::string set;
  std::size_t atoms = 0;
  /// Candidate constraint rows (grid nodes or balls after deduplication).
  std::size_t constraints = 0;
  /// Rows held by the final LP.
  std::size_t active_constraints = 0;
  std::size_t rounds = 0;
  bool row_cap_hit = false;
  std::optional<GridSpec> grid;
  std::optional<GridSpec> verify_grid;
  double rescale_factor = 1.0;
  double verified_max = 0.0;
  double lp_value = 0.0;
  std::vector<double> weights;
  DiscreteMeasure measure;
  ContentReport content;
  double runtime_ms = 0.0;
};

// ---------------------------------------------------------------------------
// Constraint generation

/// Row source for a packing LP max 1^T w, A w <= b, w >= 0 whose rows are
/// too many to hold at once.
struct RowSource {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::function<void(std::size_t, std::vector<double>&)> row;  // fills A_j
  std::function<double(std::size_t)> rhs;
};

struct GenerationResult {
  LPSolution solution;
  std::size_t active = 0;
  std::size_t rounds = 0;
  bool cap_hit = false;
};

/// Solves the LP over a growing subset of rows: start from the row with the
/// largest coefficient of each variable, then repeatedly add the most
/// violated rows. Converges to the optimum of the full LP unless the active
/// set reaches `max_rows`, in which case the last solution is returned with
/// cap_hit set (the caller's verification pass restores feasibility).
inline GenerationResult solve_by_constraint_generation(const RowSource& src, std::size_t max_rows,
                                                       std::size_t per_round, double violation_tol) {
  const std::size_t n = src.cols;
  // Rows are recomputed on demand; only the active ones are stored. The
  // seed holds, for each variable, the row with its largest scaled
  // coefficient (ties go to the earlier row).
  std::vector<char> nonzero(src.rows, 0);
  std::vector<std::size_t> colarg(n, src.rows);
  std::vector<double> colmax(n, 0.0);
  {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < src.rows; ++j) {
      src.row(j, r);
      const double scale = 1.0 / src.rhs(j);
      for (std::size_t i = 0; i < n; ++i) {
        if (r[i] == 0.0) continue;
        nonzero[j] = 1;
        if (r[i] * scale > colmax[i]) {
          colmax[i] = r[i] * scale;
          colarg[i] = j;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (colarg[i] == src.rows) throw std::invalid_argument("capacity LP: a variable appears in no constraint");

  std::vector<char> in(src.rows, 0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[colarg[i]]) {
      in[colarg[i]] = 1;
      active.push_back(colarg[i]);
    }

  std::map<std::size_t, std::vector<double>> stored;
  auto fetch = [&](std::size_t j) -> const std::vector<double>& {
    auto it = stored.find(j);
    if (it != stored.end()) return it->second;
    std::vector<double> r(n);
    src.row(j, r);
    return stored.emplace(j, std::move(r)).first->second;
  };

  GenerationResult res;
  std::vector<double> load(src.rows);
  for (;;) {
    ++res.rounds;
    std::sort(active.begin(), active.end());
    LPProblem p;
    p.objective.assign(n, 1.0);
    for (std::size_t j : active) {
      p.constraints.push_back(fetch(j));
      p.rhs.push_back(src.rhs(j));
    }
    res.solution = lp_maximize(p);
    res.active = active.size();
    const auto& w = res.solution.weights;
    parallel_for(src.rows, [&](std::size_t j) {
      if (!nonzero[j] || in[j]) {
        load[j] = 0.0;
        return;
      }
      std::vector<double> r(n);
      src.row(j, r);
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += r[i] * w[i];
      load[j] = acc / src.rhs(j) - 1.0;
    });
    std::vector<std::size_t> violated;
    for (std::size_t j = 0; j < src.rows; ++j)
      if (load[j] > violation_tol) violated.push_back(j);
    if (violated.empty()) return res;
    if (active.size() >= max_rows) {
      res.cap_hit = true;
      return res;
    }
    const std::size_t take = std::min({per_round, violated.size(), max_rows - active.size()});
    std::partial_sort(violated.begin(), violated.begin() + take, violated.end(), [&](std::size_t a, std::size_t b) {
      return load[a] > load[b] || (load[a] == load[b] && a < b);
    });
    for (std::size_t q = 0; q < take; ++q) {
      in[violated[q]] = 1;
      active.push_back(violated[q]);
    }
  }
}

// ---------------------------------------------------------------------------
// Verification

struct VerificationReport {
  double factor = 1.0;
  double max_value = 0.0;
  std::size_t nodes = 0;
};

/// Largest constrained potential on the verification grid; factor 1/V when
/// it exceeds 1 + tol.
inline VerificationReport verify_and_rescale(const DiscreteMeasure& mu, const KernelKind& kind,
                                             const GridSpec& verify, const FracParams& params, double tol,
                                             bool include_dual = false) {
  const auto ev = evaluate_on_grid(mu, kind, verify, params, false);
  VerificationReport rep;
  rep.max_value = ev.sup;
  rep.nodes = ev.evaluated;
  if (include_dual) rep.max_value = std::max(rep.max_value, evaluate_on_grid(mu, kind, verify, params, true).sup);
  rep.factor = rep.max_value > 1.0 + tol ? 1.0 / rep.max_value : 1.0;
  return rep;
}

/// Rescale factor from an already known maximum.
inline double rescale_factor_for(double max_value, double tol) {
  return max_value > 1.0 + tol ? 1.0 / max_value : 1.0;
}

namespace detail {

inline DiscreteMeasure descriptor_atoms(const SetDescriptor& set, int atoms, const FracParams& params,
                                        AtomPlacement placement) {
  if (const auto* seg = std::get_if<Segment>(&set)) return segment_measure(*seg, atoms);
  if (const auto* u = std::get_if<UnionOfCubes>(&set)) {
    std::vector<SpacetimePoint> pts;
    for (const auto& q : u->cubes) pts.push_back(cube_atom(q, placement));
    return DiscreteMeasure(params.N, std::move(pts), std::vector<double>(u->cubes.size(), 1.0));
  }
  const auto& ps = std::get<PointSet>(set).points;
  return DiscreteMeasure(params.N, ps, std::vector<double>(ps.size(), 1.0));
}

inline void check_verify_grid(const GridSpec& g, const GridSpec& v) {
  bool finer = false;
  for (std::size_t k = 0; k < g.resolution.size(); ++k) {
    if (v.resolution[k] < g.resolution[k]) throw std::invalid_argument("verification grid coarser than constraint grid");
    finer = finer || v.resolution[k] > g.resolution[k];
  }
  if (!finer) throw std::invalid_argument("verification grid must be finer than the constraint grid");
  if (v.exclusion > g.exclusion) throw std::invalid_argument("verification exclusion radius exceeds the constraint one");
}

}  // namespace detail

inline GridSpec default_verify_grid(const GridSpec& g) {
  GridSpec v = g;
  for (int& r : v.resolution) r *= 2;
  v.exclusion = 0.5 * g.exclusion;
  return v;
}

/// Growth-family rows: for every atom and every radius of the quantile set,
/// the atoms in the closed ball; duplicates keep the smallest r^d.
inline std::map<std::vector<std::size_t>, double> growth_ball_family(const DiscreteMeasure& mu, double d,
                                                                     const FracParams& params,
                                                                     std::size_t quantiles) {
  auto all = detail::pairwise_distances(mu, params);
  std::sort(all.begin(), all.end());
  all.erase(std::remove(all.begin(), all.end(), 0.0), all.end());
  std::map<std::vector<std::size_t>, double> rows;
  const std::size_t n = mu.size();
  if (all.empty()) {
    std::vector<std::size_t> everyone(n);
    for (std::size_t i = 0; i < n; ++i) everyone[i] = i;
    rows[everyone] = 1.0;
    return rows;
  }
  std::vector<double> radii;
  for (std::size_t q = 0; q < quantiles; ++q) {
    const double pos = quantiles == 1 ? 0.0 : static_cast<double>(q) / (quantiles - 1);
    radii.push_back(all[static_cast<std::size_t>(std::llround(pos * (all.size() - 1)))]);
  }
  radii.push_back(all.back());
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (double r : radii) {
      std::vector<std::size_t> members;
      for (std::size_t j = 0; j < n; ++j)
        if (dist_p(mu.atoms()[i], mu.atoms()[j], params) <= r * (1.0 + detail::ball_slack)) members.push_back(j);
      const double cap = std::pow(r, d);
      auto it = rows.find(members);
      if (it == rows.end())
        rows.emplace(std::move(members), cap);
      else
        it->second = std::min(it->second, cap);
    }
  }
  return rows;
}

/// Lower bound for the positive-measure capacity of the set (modes half and
/// tilde use the s = 1/2 kernel P; growth_s maximizes mass under the growth
/// condition of degree N + 2s - 1), paired with a lattice-cover content
/// upper bound.
inline CapacityEstimate capacity_lower(const SetDescriptor& set, CapacityMode mode, const FracParams& params,
                                       int atoms, const CapacityOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  validate(set);
  if ((mode == CapacityMode::half || mode == CapacityMode::tilde) && !params.is_half())
    throw std::invalid_argument("capacity_lower: half/tilde modes require s = 1/2");
  if (mode == CapacityMode::growth_s && !(params.s < 1.0))
    throw std::invalid_argument("capacity_lower: growth_s requires s in (0, 1)");
  CapacityEstimate est;
  est.mode = mode;
  est.params = params;
  est.set = describe(set);
  const DiscreteMeasure base = detail::descriptor_atoms(set, atoms, params, opt.placement);
  const std::size_t n = base.size();
  if (n > opt.max_cols) throw std::invalid_argument("capacity_lower: atom count exceeds the column cap");
  est.atoms = n;
  const double d = params.critical_dimension();

  if (mode == CapacityMode::growth_s) {
    const auto family = growth_ball_family(base, d, params, opt.radius_quantiles);
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (const auto& [members, cap] : family) {
      std::vector<double> r(n, 0.0);
      for (std::size_t j : members) r[j] = 1.0;
      rows.push_back(std::move(r));
      rhs.push_back(cap);
    }
    RowSource src{rows.size(), n, [&](std::size_t j, std::vector<double>& out) { out = rows[j]; },
                  [&](std::size_t j) { return rhs[j]; }};
    const auto gen = solve_by_constraint_generation(src, opt.max_rows, opt.rows_per_round, opt.violation_tol);
    est.constraints = rows.size();
    est.active_constraints = gen.active;
    est.rounds = gen.rounds;
    est.row_cap_hit = gen.cap_hit;
    est.lp_value = gen.solution.value;
    est.weights = gen.solution.weights;
    est.measure = DiscreteMeasure(params.N, base.atoms(), est.weights);
    // Verification against every radius, not only the quantiles.
    est.verified_max = est.lp_value > 0.0 ? growth_constant(est.measure, d, params, 0) : 0.0;
    est.rescale_factor = rescale_factor_for(est.verified_max, opt.tol);
  } else {
    if (!opt.grid) throw std::invalid_argument("capacity_lower: half/tilde modes need a constraint grid");
    const GridSpec grid = *opt.grid;
    grid.validate(params.N);
    const GridSpec verify = opt.verify_grid ? *opt.verify_grid : default_verify_grid(grid);
    verify.validate(params.N);
    detail::check_verify_grid(grid, verify);
    est.grid = grid;
    est.verify_grid = verify;
    const KernelKind kind = HalfKernel{};
    std::vector<SpacetimePoint> nodes;
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
      auto p = grid.node(k);
      if (!detail::node_excluded(p, base, grid.exclusion, params)) nodes.push_back(std::move(p));
    }
    const bool tilde = mode == CapacityMode::tilde;
    const std::size_t m = nodes.size() * (tilde ? 2 : 1);
    const auto& A = base.atoms();
    RowSource src{m, n,
                  [&](std::size_t j, std::vector<double>& out) {
                    const bool dual = j >= nodes.size();
                    const auto& p = nodes[dual ? j - nodes.size() : j];
                    out.assign(n, 0.0);
                    for (std::size_t i = 0; i < n; ++i) out[i] = detail::kernel_between(kind, p, A[i], params, dual);
                  },
                  [](std::size_t) { return 1.0; }};
    const auto gen = solve_by_constraint_generation(src, opt.max_rows, opt.rows_per_round, opt.violation_tol);
    est.constraints = m;
    est.active_constraints = gen.active;
    est.rounds = gen.rounds;
    est.row_cap_hit = gen.cap_hit;
    est.lp_value = gen.solution.value;
    est.weights = gen.solution.weights;
    est.measure = DiscreteMeasure(params.N, base.atoms(), est.weights);
    const auto ver = verify_and_rescale(est.measure, kind, verify, params, opt.tol, tilde);
    est.verified_max = ver.max_value;
    est.rescale_factor = ver.factor;
  }
  est.lower = est.lp_value * est.rescale_factor;
  ContentOptions copt;
  copt.metric = opt.content_metric;
  est.content = hausdorff_content_report(set, d, params, opt.content_depth, copt);
  est.upper = est.content.value;
  est.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return est;
}

// ---------------------------------------------------------------------------
// Cantor corner sums

/// T(chi_{Q^k \ Q^{k+m}} mu)(z) with the s = 1/2 kernel, where Q^j is the
/// generation-j cube touching the corner (x = 0, t = 1), z = (0, 1) is the
/// top of Q^k, and mu is the natural measure sampled at generation k + m.
/// Every contributing atom lies below z, so each term is nonnegative.
inline double cantor_corner_sum(const CantorSpec& spec, int k, int m) {
  if (m < 1) throw std::invalid_argument("cantor_corner_sum: m must be >= 1");
  if (k < 0) throw std::invalid_argument("cantor_corner_sum: k must be >= 0");
  CantorSpec full = spec;
  full.generation = k + m;
  if (full.cube_count() > spec.cap) throw std::invalid_argument("cantor_corner_sum: generation exceeds the cap");
  const int N = spec.N;
  CantorSpec local = spec;
  local.generation = m;
  const auto gen = cantor_generation(local);
  const double lk = detail::cantor_side(N, k);
  const double mass = full.cube_mass();
  const FracParams params(0.5, N);
  const KernelKind kind = HalfKernel{};
  SpacetimePoint z(std::vector<double>(N, 0.0), 1.0);
  double acc = 0.0;
  for (std::size_t c = 0; c < gen.cubes.size(); ++c) {
    const auto& q = gen.cubes[c];
    // The corner cube of the local generation: spatial corner 0, top in t.
    bool corner = q.time_start + q.time_length == 1.0;
    for (double v : q.spatial_corner) corner = corner && v == 0.0;
    if (corner) continue;
    const auto& a = gen.measure.atoms()[c];
    SpacetimePoint y(a.x, 1.0 - lk + lk * a.t);
    for (double& v : y.x) v *= lk;
    acc += mass * detail::kernel_between(kind, z, y, params, false);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json grid_json(const std::optional<GridSpec>& g) {
  if (!g) return nullptr;
  nlohmann::ordered_json j;
  j["lo"] = g->lo;
  j["hi"] = g->hi;
  j["resolution"] = g->resolution;
  j["exclusion"] = g->exclusion;
  return j;
}

inline nlohmann::ordered_json to_json(const CapacityEstimate& e) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(e.mode);
  j["s"] = e.params.s;
  j["N"] = e.params.N;
  j["set"] = e.set;
  j["lower"] = e.lower;
  j["upper"] = e.upper;
  j["rescale_factor"] = e.rescale_factor;
  j["atoms"] = e.atoms;
  j["constraints"] = e.constraints;
  j["grid"] = grid_json(e.grid);
  j["verify_grid"] = grid_json(e.verify_grid);
  j["runtime_ms"] = e.runtime_ms;
  return j;
}

}  // namespace fraccap

#endif
