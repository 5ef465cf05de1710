#ifndef FRACCAP_GEOMETRY_HPP
#define FRACCAP_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

namespace fraccap {

/// Order s of the fractional heat operator together with the spatial
/// dimension N. s = 1 is accepted as the classical heat limit so the
/// Gaussian kernel can be cross-checked through the same machinery.
struct FracParams {
  double s = 0.5;
  int N = 1;

  FracParams() = default;
  FracParams(double s_, int N_) : s(s_), N(N_) {
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("FracParams: s must lie in (0, 1]");
    if (N < 1) throw std::invalid_argument("FracParams: N must be >= 1");
  }

  /// Critical dimension N + 2s - 1 of the s-caloric capacity.
  double critical_dimension() const { return N + 2.0 * s - 1.0; }
  double time_exponent() const { return 1.0 / (2.0 * s); }
  bool is_half() const { return s == 0.5; }

  friend bool operator==(const FracParams&, const FracParams&) = default;
};

struct SpacetimePoint {
  std::vector<double> x;
  double t = 0.0;

  SpacetimePoint() = default;
  SpacetimePoint(std::vector<double> x_, double t_) : x(std::move(x_)), t(t_) {}

  std::size_t dim() const { return x.size(); }
  friend bool operator==(const SpacetimePoint&, const SpacetimePoint&) = default;
};

namespace detail {

inline void require_dim(const SpacetimePoint& p, const FracParams& params, const char* what) {
  if (p.x.size() != static_cast<std::size_t>(params.N))
    throw std::invalid_argument(std::string(what) + ": point dimension does not match N");
}

inline double spatial_norm(const double* x, int n) {
  if (n == 1) return std::abs(x[0]);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * x[i];
  return std::sqrt(acc);
}

inline double spatial_distance(const double* a, const double* b, int n) {
  if (n == 1) return std::abs(a[0] - b[0]);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// |dt|^{1/(2s)} with the s = 1/2 case kept exact.
inline double time_gauge(double dt, double s) {
  const double a = std::abs(dt);
  if (s == 0.5) return a;
  return std::pow(a, 1.0 / (2.0 * s));
}

}  // namespace detail

/// s-parabolic distance max(|x - y|, |t - u|^{1/(2s)}).
inline double dist_p(const SpacetimePoint& a, const SpacetimePoint& b, const FracParams& params) {
  detail::require_dim(a, params, "dist_p");
  detail::require_dim(b, params, "dist_p");
  const double dx = detail::spatial_distance(a.x.data(), b.x.data(), params.N);
  return std::max(dx, detail::time_gauge(a.t - b.t, params.s));
}

/// |p|_p, the parabolic gauge of a single point.
inline double parabolic_norm(const SpacetimePoint& p, const FracParams& params) {
  detail::require_dim(p, params, "parabolic_norm");
  return std::max(detail::spatial_norm(p.x.data(), params.N), detail::time_gauge(p.t, params.s));
}

/// Parabolic dilation (x, t) -> (lambda x, lambda^{2s} t).
inline SpacetimePoint dilate(const SpacetimePoint& p, double lambda, const FracParams& params) {
  if (!(lambda > 0.0)) throw std::invalid_argument("dilate: lambda must be positive");
  detail::require_dim(p, params, "dilate");
  SpacetimePoint out = p;
  for (double& xi : out.x) xi *= lambda;
  out.t *= std::pow(lambda, 2.0 * params.s);
  return out;
}

/// Product of N spatial intervals of length `side` and one time interval of
/// length side^{2s}.
struct ParabolicCube {
  std::vector<double> spatial_corner;
  double spatial_side = 1.0;
  double time_start = 0.0;
  double time_length = 1.0;

  static ParabolicCube make(std::vector<double> corner, double side, double time_start,
                            const FracParams& params) {
    if (!(side > 0.0)) throw std::invalid_argument("ParabolicCube: side must be positive");
    if (corner.size() != static_cast<std::size_t>(params.N))
      throw std::invalid_argument("ParabolicCube: corner dimension does not match N");
    ParabolicCube q;
    q.spatial_corner = std::move(corner);
    q.spatial_side = side;
    q.time_start = time_start;
    q.time_length = params.is_half() ? side : std::pow(side, 2.0 * params.s);
    return q;
  }

  bool is_parabolic(const FracParams& params, double rel_tol = 1e-12) const {
    const double expect = std::pow(spatial_side, 2.0 * params.s);
    return spatial_side > 0.0 && std::abs(time_length - expect) <= rel_tol * expect;
  }

  SpacetimePoint center() const {
    std::vector<double> c(spatial_corner);
    for (double& v : c) v += 0.5 * spatial_side;
    return {std::move(c), time_start + 0.5 * time_length};
  }

  /// Closed-cube membership.
  bool contains(const SpacetimePoint& p) const {
    for (std::size_t i = 0; i < spatial_corner.size(); ++i) {
      if (p.x[i] < spatial_corner[i] || p.x[i] > spatial_corner[i] + spatial_side) return false;
    }
    return p.t >= time_start && p.t <= time_start + time_length;
  }
};

enum class Orientation { horizontal, vertical };

struct Segment {
  Orientation orientation = Orientation::horizontal;
  double length = 1.0;
  SpacetimePoint anchor{{0.0}, 0.0};
};

struct UnionOfCubes {
  std::vector<ParabolicCube> cubes;
};

struct PointSet {
  std::vector<SpacetimePoint> points;
};

/// Structured description of a compact set in R^{N+1}.
using SetDescriptor = std::variant<Segment, UnionOfCubes, PointSet>;

inline void validate(const SetDescriptor& set) {
  if (const auto* seg = std::get_if<Segment>(&set)) {
    if (!(seg->length > 0.0)) throw std::invalid_argument("Segment: length must be positive");
    if (seg->anchor.x.empty()) throw std::invalid_argument("Segment: anchor needs a spatial part");
  } else if (const auto* u = std::get_if<UnionOfCubes>(&set)) {
    if (u->cubes.empty()) throw std::invalid_argument("UnionOfCubes: empty cube list");
  } else if (std::get<PointSet>(set).points.empty()) {
    throw std::invalid_argument("PointSet: empty point list");
  }
}

inline std::string describe(const SetDescriptor& set) {
  if (const auto* seg = std::get_if<Segment>(&set))
    return std::string(seg->orientation == Orientation::horizontal ? "horizontal" : "vertical") +
           " segment";
  if (std::holds_alternative<UnionOfCubes>(set)) return "union of cubes";
  return "point set";
}

/// Axis-aligned closed box in R^{N+1}; the last axis is time. Degenerate
/// axes (lo == hi) represent lower-dimensional pieces.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

namespace detail {

inline std::vector<Box> element_boxes(const SetDescriptor& set, int N) {
  std::vector<Box> boxes;
  if (const auto* seg = std::get_if<Segment>(&set)) {
    Box b;
    b.lo = seg->anchor.x;
    b.lo.push_back(seg->anchor.t);
    b.hi = b.lo;
    if (seg->orientation == Orientation::horizontal)
      b.hi[0] += seg->length;
    else
      b.hi[N] += seg->length;
    boxes.push_back(std::move(b));
  } else if (const auto* u = std::get_if<UnionOfCubes>(&set)) {
    for (const auto& q : u->cubes) {
      Box b;
      b.lo = q.spatial_corner;
      b.lo.push_back(q.time_start);
      b.hi = q.spatial_corner;
      for (double& v : b.hi) v += q.spatial_side;
      b.hi.push_back(q.time_start + q.time_length);
      boxes.push_back(std::move(b));
    }
  } else {
    for (const auto& p : std::get<PointSet>(set).points) {
      Box b;
      b.lo = p.x;
      b.lo.push_back(p.t);
      b.hi = b.lo;
      boxes.push_back(std::move(b));
    }
  }
  for (const auto& b : boxes) {
    if (b.lo.size() != static_cast<std::size_t>(N + 1))
      throw std::invalid_argument("set descriptor dimension does not match N");
  }
  return boxes;
}

struct IndexHash {
  std::size_t operator()(const std::vector<std::int64_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t k : v) {
      h ^= static_cast<std::uint64_t>(k) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

inline Box bounding_box(const SetDescriptor& set, int N) {
  const auto boxes = detail::element_boxes(set, N);
  Box out = boxes.front();
  for (const auto& b : boxes) {
    for (int a = 0; a <= N; ++a) {
      out.lo[a] = std::min(out.lo[a], b.lo[a]);
      out.hi[a] = std::max(out.hi[a], b.hi[a]);
    }
  }
  return out;
}

enum class ContentMetric { parabolic, euclidean };

inline const char* to_string(ContentMetric m) {
  return m == ContentMetric::parabolic ? "parabolic" : "euclidean";
}

struct ContentOptions {
  ContentMetric metric = ContentMetric::parabolic;
  /// Root lattice cube; derived from the bounding box when absent. Sharing a
  /// root between sets makes covers comparable under inclusion.
  std::optional<ParabolicCube> root;
  /// Stop refining once a generation would exceed this many cells.
  std::size_t cell_cap = 4'000'000;
};

struct ContentReport {
  double value = 0.0;
  int best_generation = 0;
  int generations_used = 0;
  /// Smallest observed time_length / side^{2s} over the lattice generations.
  double distortion = 1.0;
  ContentMetric metric = ContentMetric::parabolic;
  std::vector<double> generation_sums;
};

/// Greedy hierarchical cover of a described set by lattice cells.
///
/// Generation j halves the spatial side of generation j - 1 and re-slices the
/// time axis into ceil(tau / (l/2)^{2s}) equal slabs, so every cell has time
/// length at most side^{2s} and sits inside an s-parabolic cube of the same
/// side. For s = 1/2 this is the dyadic lattice. Cells are kept when they
/// meet the set; the reported value is the smallest cover sum over
/// generations 0..depth, which makes it nonincreasing in depth.
inline ContentReport hausdorff_content_report(const SetDescriptor& set, double d,
                                              const FracParams& params, int depth,
                                              const ContentOptions& options = {}) {
  validate(set);
  if (!(d > 0.0)) throw std::invalid_argument("hausdorff_content_upper: d must be positive");
  if (depth < 0) throw std::invalid_argument("hausdorff_content_upper: depth must be >= 0");
  const int N = params.N;
  const auto boxes = detail::element_boxes(set, N);

  std::vector<double> origin(N + 1);
  double side = 0.0;
  double tau = 0.0;
  if (options.root) {
    const auto& r = *options.root;
    if (r.spatial_corner.size() != static_cast<std::size_t>(N))
      throw std::invalid_argument("hausdorff_content_upper: root dimension mismatch");
    for (int a = 0; a < N; ++a) origin[a] = r.spatial_corner[a];
    origin[N] = r.time_start;
    side = r.spatial_side;
    tau = r.time_length;
  } else {
    const Box bb = bounding_box(set, N);
    for (int a = 0; a < N; ++a) side = std::max(side, bb.hi[a] - bb.lo[a]);
    side = std::max(side, detail::time_gauge(bb.hi[N] - bb.lo[N], params.s));
    if (!(side > 0.0)) side = 1.0;
    origin = bb.lo;
    tau = params.is_half() ? side : std::pow(side, 2.0 * params.s);
  }

  ContentReport report;
  report.metric = options.metric;
  report.value = std::numeric_limits<double>::infinity();
  constexpr double snap = 1e-9;

  for (int j = 0; j <= depth; ++j) {
    if (j > 0) {
      side *= 0.5;
      const double target = params.is_half() ? side : std::pow(side, 2.0 * params.s);
      const double slabs = std::max(1.0, std::ceil(tau / target - 1e-12));
      tau /= slabs;
    }
    const double ideal = params.is_half() ? side : std::pow(side, 2.0 * params.s);
    report.distortion = std::min(report.distortion, tau / ideal);

    // Index ranges per element box. Positive-length axes use open overlap,
    // degenerate axes use half-open cell membership.
    std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> ranges;
    ranges.reserve(boxes.size());
    double total_cells = 0.0;
    for (const auto& b : boxes) {
      std::vector<std::pair<std::int64_t, std::int64_t>> r(N + 1);
      double cells = 1.0;
      for (int a = 0; a <= N; ++a) {
        const double h = (a < N) ? side : tau;
        const double lo = (b.lo[a] - origin[a]) / h;
        const double hi = (b.hi[a] - origin[a]) / h;
        std::int64_t i0, i1;
        if (b.hi[a] > b.lo[a]) {
          i0 = static_cast<std::int64_t>(std::floor(lo + snap));
          i1 = static_cast<std::int64_t>(std::ceil(hi - snap)) - 1;
          if (i1 < i0) i1 = i0;
        } else {
          i0 = i1 = static_cast<std::int64_t>(std::floor(lo + snap));
        }
        r[a] = {i0, i1};
        cells *= static_cast<double>(i1 - i0 + 1);
      }
      total_cells += cells;
      ranges.push_back(std::move(r));
    }
    if (total_cells > static_cast<double>(options.cell_cap)) break;

    std::size_t count = 0;
    if (ranges.size() == 1) {
      count = static_cast<std::size_t>(total_cells);
    } else {
      std::unordered_set<std::vector<std::int64_t>, detail::IndexHash> cells;
      cells.reserve(static_cast<std::size_t>(total_cells));
      std::vector<std::int64_t> idx(N + 1);
      for (const auto& r : ranges) {
        for (int a = 0; a <= N; ++a) idx[a] = r[a].first;
        while (true) {
          cells.insert(idx);
          int a = N;
          while (a >= 0) {
            if (++idx[a] <= r[a].second) break;
            idx[a] = r[a].first;
            --a;
          }
          if (a < 0) break;
        }
      }
      count = cells.size();
    }

    double diam = side;
    if (options.metric == ContentMetric::euclidean)
      diam = std::sqrt(static_cast<double>(N) * side * side + tau * tau);
    const double sum = static_cast<double>(count) * std::pow(diam, d);
    report.generation_sums.push_back(sum);
    report.generations_used = j;
    if (sum < report.value) {
      report.value = sum;
      report.best_generation = j;
    }
  }
  return report;
}

/// Upper bound for H^d_infty of the described set (greedy lattice cover).
inline double hausdorff_content_upper(const SetDescriptor& set, double d, const FracParams& params,
                                      int depth, const ContentOptions& options = {}) {
  return hausdorff_content_report(set, d, params, depth, options).value;
}

}  // namespace fraccap

#endif
