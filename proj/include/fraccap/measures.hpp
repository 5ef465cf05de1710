#ifndef FRACCAP_MEASURES_HPP
#define FRACCAP_MEASURES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fraccap/geometry.hpp"
#include "fraccap/parallel.hpp"

namespace fraccap {

namespace detail {

inline void check_atoms(int N, const std::vector<SpacetimePoint>& atoms, const std::vector<double>& weights) {
  if (N < 1) throw std::invalid_argument("measure: N must be >= 1");
  if (atoms.size() != weights.size()) throw std::invalid_argument("measure: atoms and weights differ in length");
  for (const auto& a : atoms)
    if (a.x.size() != static_cast<std::size_t>(N)) throw std::invalid_argument("measure: atom dimension mismatch");
  for (double w : weights)
    if (!std::isfinite(w)) throw std::invalid_argument("measure: weights must be finite");
}

}  // namespace detail

/// Finite atomic measure with real weights.
class SignedDiscreteMeasure {
 public:
  SignedDiscreteMeasure() = default;
  SignedDiscreteMeasure(int N, std::vector<SpacetimePoint> atoms, std::vector<double> weights)
      : N_(N), atoms_(std::move(atoms)), weights_(std::move(weights)) {
    detail::check_atoms(N_, atoms_, weights_);
  }

  int dim() const { return N_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const std::vector<SpacetimePoint>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  double total_mass() const {
    double acc = 0.0;
    for (double w : weights_) acc += w;
    return acc;
  }
  double total_variation() const {
    double acc = 0.0;
    for (double w : weights_) acc += std::abs(w);
    return acc;
  }
  SignedDiscreteMeasure scaled(double lambda) const {
    std::vector<double> w(weights_);
    for (double& v : w) v *= lambda;
    return {N_, atoms_, std::move(w)};
  }

 protected:
  int N_ = 1;
  std::vector<SpacetimePoint> atoms_;
  std::vector<double> weights_;
};

/// Finite atomic measure with nonnegative weights.
class DiscreteMeasure : public SignedDiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  DiscreteMeasure(int N, std::vector<SpacetimePoint> atoms, std::vector<double> weights)
      : SignedDiscreteMeasure(N, std::move(atoms), std::move(weights)) {
    for (double w : weights_)
      if (w < 0.0) throw std::invalid_argument("DiscreteMeasure: negative weight");
  }

  DiscreteMeasure scaled(double lambda) const {
    if (lambda < 0.0) throw std::invalid_argument("DiscreteMeasure::scaled: negative factor");
    std::vector<double> w(weights_);
    for (double& v : w) v *= lambda;
    return {N_, atoms_, std::move(w)};
  }
  SignedDiscreteMeasure to_signed() const { return {N_, atoms_, weights_}; }
};

// ---------------------------------------------------------------------------
// Cantor construction

enum class AtomPlacement { center, upper_corner };

struct CantorSpec {
  int N = 1;
  int generation = 0;
  std::size_t cap = std::size_t{1} << 20;
  AtomPlacement placement = AtomPlacement::center;

  /// 2^{k(N+1)} cubes.
  std::size_t cube_count() const {
    const int bits = generation * (N + 1);
    if (bits >= 63) return std::numeric_limits<std::size_t>::max();
    return std::size_t{1} << bits;
  }
  double side() const { return std::exp2(-static_cast<double>(generation) * (N + 1) / N); }
  double cube_mass() const { return std::ldexp(1.0, -generation * (N + 1)); }
};

struct CantorGeneration {
  std::vector<ParabolicCube> cubes;
  DiscreteMeasure measure;
};

namespace detail {

/// Side of generation k as an exact power of two when N | k(N+1).
inline double cantor_side(int N, int k) {
  const int num = k * (N + 1);
  if (num % N == 0) return std::ldexp(1.0, -num / N);
  return std::exp2(-static_cast<double>(num) / N);
}

inline SpacetimePoint cube_atom(const ParabolicCube& q, AtomPlacement placement) {
  if (placement == AtomPlacement::center) return q.center();
  // Spatial center, top of the time interval.
  SpacetimePoint c = q.center();
  c.t = q.time_start + q.time_length;
  return c;
}

}  // namespace detail

/// Generation-k cubes of the corner Cantor set in R^{N+1} built from the unit
/// cube: each cube keeps its 2^{N+1} corner children of side 2^{-(N+1)/N}
/// times its own. The natural measure puts mass 2^{-k(N+1)} on each cube.
inline CantorGeneration cantor_generation(const CantorSpec& spec) {
  if (spec.N < 1) throw std::invalid_argument("cantor_generation: N must be >= 1");
  if (spec.generation < 0) throw std::invalid_argument("cantor_generation: k must be >= 0");
  if (spec.cube_count() > spec.cap) throw std::invalid_argument("cantor_generation: cube count exceeds cap");
  const int N = spec.N;
  const int children = 1 << (N + 1);
  std::vector<ParabolicCube> level(1);
  level[0].spatial_corner.assign(N, 0.0);
  level[0].spatial_side = 1.0;
  level[0].time_start = 0.0;
  level[0].time_length = 1.0;
  for (int k = 1; k <= spec.generation; ++k) {
    const double child = detail::cantor_side(N, k);
    std::vector<ParabolicCube> next;
    next.reserve(level.size() * children);
    for (const auto& q : level) {
      const double offset = q.spatial_side - child;
      for (int c = 0; c < children; ++c) {
        ParabolicCube ch;
        ch.spatial_corner = q.spatial_corner;
        for (int i = 0; i < N; ++i)
          if (c & (1 << (N - i))) ch.spatial_corner[i] += offset;
        ch.time_start = q.time_start + ((c & 1) ? offset : 0.0);
        ch.spatial_side = child;
        ch.time_length = child;
        next.push_back(std::move(ch));
      }
    }
    level = std::move(next);
  }
  std::vector<SpacetimePoint> atoms;
  atoms.reserve(level.size());
  for (const auto& q : level) atoms.push_back(detail::cube_atom(q, spec.placement));
  std::vector<double> weights(level.size(), spec.cube_mass());
  return {std::move(level), DiscreteMeasure(N, std::move(atoms), std::move(weights))};
}

/// m midpoint atoms of weight L/m on the segment.
inline DiscreteMeasure segment_measure(const Segment& seg, int m) {
  validate(SetDescriptor{seg});
  if (m < 1) throw std::invalid_argument("segment_measure: m must be >= 1");
  const int N = static_cast<int>(seg.anchor.x.size());
  std::vector<SpacetimePoint> atoms;
  atoms.reserve(m);
  const double h = seg.length / m;
  for (int i = 0; i < m; ++i) {
    SpacetimePoint p = seg.anchor;
    const double off = (i + 0.5) * h;
    if (seg.orientation == Orientation::horizontal)
      p.x[0] += off;
    else
      p.t += off;
    atoms.push_back(std::move(p));
  }
  return DiscreteMeasure(N, std::move(atoms), std::vector<double>(m, h));
}

// ---------------------------------------------------------------------------
// Growth constants

struct GrowthReport {
  double constant = 0.0;
  /// Smallest radius considered (minimal interatomic distance).
  double radius_floor = 0.0;
  bool floor_by_convention = false;
  std::size_t radii_checked = 0;
  std::size_t argmax_atom = 0;
  double argmax_radius = 0.0;
};

namespace detail {

inline std::vector<double> pairwise_distances(const SignedDiscreteMeasure& mu, const FracParams& params) {
  const std::size_t n = mu.size();
  std::vector<double> d;
  d.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.push_back(dist_p(mu.atoms()[i], mu.atoms()[j], params));
  return d;
}

// Closed balls with a relative slack so atoms at exactly the radius count.
inline constexpr double ball_slack = 1e-12;

}  // namespace detail

/// Largest mu(B_p(a, r)) / r^d over atoms a and radii r >= the minimal
/// interatomic distance, balls closed. With radius_samples == 0 every
/// distance from each center is tried, which gives the exact discrete
/// maximum (the ratio only decreases between consecutive distances). With
/// radius_samples > 0 the radii are that many quantiles of the pairwise
/// distances plus the diameter.
inline GrowthReport growth_report(const DiscreteMeasure& mu, double d, const FracParams& params,
                                  std::size_t radius_samples = 0) {
  if (mu.empty()) throw std::invalid_argument("growth_constant: empty measure");
  if (!(d > 0.0)) throw std::invalid_argument("growth_constant: d must be positive");
  if (mu.dim() != params.N) throw std::invalid_argument("growth_constant: dimension mismatch");
  const std::size_t n = mu.size();
  GrowthReport rep;
  if (n == 1) {
    rep.constant = mu.weights()[0];
    rep.radius_floor = 1.0;
    rep.floor_by_convention = true;
    rep.radii_checked = 1;
    rep.argmax_radius = 1.0;
    return rep;
  }
  const auto& atoms = mu.atoms();
  const auto& w = mu.weights();
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = dist_p(atoms[i], atoms[j], params);
      if (dij > 0.0) floor = std::min(floor, dij);
    }
  if (!std::isfinite(floor)) {
    // Every atom coincides: a single point carrying the total mass.
    rep.constant = mu.total_mass();
    rep.radius_floor = 1.0;
    rep.floor_by_convention = true;
    rep.radii_checked = 1;
    rep.argmax_radius = 1.0;
    return rep;
  }
  rep.radius_floor = floor;

  std::vector<double> sampled;
  if (radius_samples > 0) {
    auto all = detail::pairwise_distances(mu, params);
    std::sort(all.begin(), all.end());
    all.erase(std::remove_if(all.begin(), all.end(), [&](double r) { return r < floor; }), all.end());
    for (std::size_t q = 0; q < radius_samples; ++q) {
      const double pos = radius_samples == 1 ? 0.0 : static_cast<double>(q) / (radius_samples - 1);
      sampled.push_back(all[static_cast<std::size_t>(std::llround(pos * (all.size() - 1)))]);
    }
    sampled.push_back(all.back());
    std::sort(sampled.begin(), sampled.end());
    sampled.erase(std::unique(sampled.begin(), sampled.end()), sampled.end());
  }

  struct Best {
    double value = -1.0;
    double radius = 0.0;
    std::size_t checked = 0;
  };
  std::vector<Best> best(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::pair<double, double>> dw(n);
    for (std::size_t j = 0; j < n; ++j) dw[j] = {dist_p(atoms[i], atoms[j], params), w[j]};
    std::sort(dw.begin(), dw.end());
    Best b;
    auto consider = [&](double r, double mass) {
      ++b.checked;
      const double ratio = mass / std::pow(r, d);
      if (ratio > b.value) {
        b.value = ratio;
        b.radius = r;
      }
    };
    if (radius_samples == 0) {
      double mass = 0.0;
      std::size_t j = 0;
      // Radius floor first, then each distinct own distance above it.
      while (j < n && dw[j].first <= floor * (1.0 + detail::ball_slack)) mass += dw[j++].second;
      consider(floor, mass);
      while (j < n) {
        const double r = dw[j].first;
        while (j < n && dw[j].first <= r * (1.0 + detail::ball_slack)) mass += dw[j++].second;
        consider(r, mass);
      }
    } else {
      double mass = 0.0;
      std::size_t j = 0;
      for (double r : sampled) {
        while (j < n && dw[j].first <= r * (1.0 + detail::ball_slack)) mass += dw[j++].second;
        consider(r, mass);
      }
    }
    best[i] = b;
  });
  rep.constant = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.radii_checked += best[i].checked;
    if (best[i].value > rep.constant) {
      rep.constant = best[i].value;
      rep.argmax_atom = i;
      rep.argmax_radius = best[i].radius;
    }
  }
  return rep;
}

inline double growth_constant(const DiscreteMeasure& mu, double d, const FracParams& params,
                              std::size_t radius_samples = 0) {
  return growth_report(mu, d, params, radius_samples).constant;
}

/// Divides the weights by the growth constant so the rescaled measure has
/// growth constant 1 in degree d.
inline DiscreteMeasure frostman_rescale(const DiscreteMeasure& mu, double d, const FracParams& params) {
  const double c = growth_constant(mu, d, params);
  if (!(c > 0.0)) throw std::invalid_argument("frostman_rescale: zero measure");
  return mu.scaled(1.0 / c);
}

// ---------------------------------------------------------------------------
// Text format: one line per atom, "x_1 ... x_N t weight".

inline void save_measure(std::ostream& os, const SignedDiscreteMeasure& mu) {
  char buf[64];
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto& a = mu.atoms()[i];
    for (double v : a.x) {
      std::snprintf(buf, sizeof buf, "%.17g ", v);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", a.t, mu.weights()[i]);
    os << buf;
  }
}

namespace detail {

inline void read_measure_rows(std::istream& is, int N, std::vector<SpacetimePoint>& atoms,
                              std::vector<double>& weights) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    std::string tok;
    while (ls >> tok) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw std::invalid_argument("measure file: bad number on line " + std::to_string(lineno));
      vals.push_back(v);
    }
    if (vals.size() != static_cast<std::size_t>(N) + 2)
      throw std::invalid_argument("measure file: expected N + 2 columns on line " + std::to_string(lineno));
    atoms.emplace_back(std::vector<double>(vals.begin(), vals.begin() + N), vals[N]);
    weights.push_back(vals[N + 1]);
  }
}

}  // namespace detail

inline DiscreteMeasure load_measure(std::istream& is, int N) {
  std::vector<SpacetimePoint> atoms;
  std::vector<double> weights;
  detail::read_measure_rows(is, N, atoms, weights);
  return DiscreteMeasure(N, std::move(atoms), std::move(weights));
}

inline SignedDiscreteMeasure load_signed_measure(std::istream& is, int N) {
  std::vector<SpacetimePoint> atoms;
  std::vector<double> weights;
  detail::read_measure_rows(is, N, atoms, weights);
  return SignedDiscreteMeasure(N, std::move(atoms), std::move(weights));
}

}  // namespace fraccap

#endif
