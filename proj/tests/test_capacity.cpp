#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "fraccap/capacity.hpp"
#include "fraccap/experiments.hpp"

using namespace fraccap;

namespace {

SpacetimePoint pt(double x, double t) { return SpacetimePoint({x}, t); }

const FracParams kHalf(0.5, 1);

CantorGeneration cantor(int k) {
  CantorSpec spec;
  spec.generation = k;
  return cantor_generation(spec);
}

}  // namespace

TEST(Capacity, SinglePointLowerBoundIsDistanceToNearestNode) {
  // The node (0, 0.1) sees the atom with kernel 1/0.1, so the LP caps the
  // weight at 0.1; the verification grid never exceeds 1.
  PointSet ps{{pt(0, 0)}};
  CapacityOptions o;
  o.grid = GridSpec::box2(-1, 1, 0.1, 1.1, 3, 3, 0.05);
  const auto est = capacity_lower(ps, CapacityMode::half, kHalf, 0, o);
  EXPECT_NEAR(est.lower, 0.1, 1e-12);
  EXPECT_EQ(est.rescale_factor, 1.0);
  EXPECT_LE(est.verified_max, 1.0);
}

TEST(Capacity, HorizontalSegmentReachesTargetLowerBound) {
  // Target: a unit horizontal segment has s = 1/2 capacity bounded below by
  // 0.3 with 400 atoms.
  const auto est = experiments::horizontal_segment_capacity(400);
  EXPECT_GE(est.lower, 0.30) << "lp=" << est.lp_value << " factor=" << est.rescale_factor;
}

TEST(Capacity, VerticalSegmentSequenceDecreases) {
  const auto seq = experiments::vertical_segment_sequence(2, 4);
  ASSERT_EQ(seq.size(), 3u);
  for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_LT(seq[i].estimate.lower, seq[i - 1].estimate.lower);
  for (const auto& l : seq) EXPECT_GT(l.estimate.lower, 0.0);
}

TEST(Capacity, GrowthModeMatchesDenseLp) {
  // Oracle: the whole ball family handed to the simplex at once.
  const auto g = cantor(2);
  const FracParams params(0.5, 1);
  CapacityOptions o;
  const auto est = capacity_lower(UnionOfCubes{g.cubes}, CapacityMode::growth_s, params, 0, o);
  const auto family = growth_ball_family(g.measure, params.critical_dimension(), params, o.radius_quantiles);
  LPProblem full;
  full.objective.assign(g.measure.size(), 1.0);
  for (const auto& [members, cap] : family) {
    std::vector<double> row(g.measure.size(), 0.0);
    for (std::size_t j : members) row[j] = 1.0;
    full.constraints.push_back(row);
    full.rhs.push_back(cap);
  }
  EXPECT_NEAR(est.lp_value, lp_maximize(full).value, 1e-9);
  EXPECT_GT(est.lower, 0.0);
  EXPECT_LE(growth_constant(est.measure.scaled(est.rescale_factor), params.critical_dimension(), params), 1.0 + 1e-6);
}

TEST(Capacity, BallFamilyKeepsSmallestCap) {
  // Collinear atoms at 0, 1, 3; a member set reached by several balls keeps the smallest r^d.
  const DiscreteMeasure mu(1, {pt(0, 0), pt(1, 0), pt(3, 0)}, {1.0, 1.0, 1.0});
  const auto fam = growth_ball_family(mu, 1.0, kHalf, 16);
  const std::vector<std::size_t> all = {0, 1, 2}, first_two = {0, 1};
  ASSERT_TRUE(fam.count(all));
  EXPECT_DOUBLE_EQ(fam.at(all), 2.0);  // ball around the middle atom of radius 2
  EXPECT_DOUBLE_EQ(fam.at(first_two), 1.0);
}

TEST(Capacity, GrowthModeOnVerticalSegment) {
  Segment seg;
  seg.orientation = Orientation::vertical;
  const FracParams params(0.75, 1);
  const auto est = capacity_lower(seg, CapacityMode::growth_s, params, 32);
  EXPECT_GT(est.lower, 0.0);
  EXPECT_LE(growth_constant(DiscreteMeasure(1, est.measure.atoms(), est.weights).scaled(est.rescale_factor),
                            params.critical_dimension(), params),
            1.0 + 1e-6);
}

TEST(Verify, RescaleExamples) {
  const DiscreteMeasure mu(1, {pt(0, 0)}, {1.0});
  const auto g = GridSpec::box2(-1, 1, 0.5, 1.5, 3, 3, 0.0);
  const auto r = verify_and_rescale(mu, HalfKernel{}, g, kHalf, 1e-6);
  EXPECT_DOUBLE_EQ(r.max_value, 2.0);
  EXPECT_DOUBLE_EQ(r.factor, 0.5);
  const auto ok = verify_and_rescale(mu.scaled(0.25), HalfKernel{}, g, kHalf, 1e-6);
  EXPECT_DOUBLE_EQ(ok.factor, 1.0);
  EXPECT_DOUBLE_EQ(rescale_factor_for(1.0 + 1e-7, 1e-6), 1.0);
  EXPECT_DOUBLE_EQ(rescale_factor_for(4.0, 1e-6), 0.25);
  // The dual potential of an atom above the grid.
  const DiscreteMeasure up(1, {pt(0, 3)}, {1.0});
  EXPECT_DOUBLE_EQ(verify_and_rescale(up, HalfKernel{}, g, kHalf, 1e-6, false).max_value, 0.0);
  EXPECT_GT(verify_and_rescale(up, HalfKernel{}, g, kHalf, 1e-6, true).max_value, 0.0);
}

TEST(Verify, GridMustBeFiner) {
  Segment seg;
  CapacityOptions o;
  o.grid = GridSpec::box2(-1, 2, 0.01, 2, 20, 20, 0.05);
  o.verify_grid = GridSpec::box2(-1, 2, 0.01, 2, 10, 40, 0.025);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::half, kHalf, 20, o), std::invalid_argument);
  o.verify_grid = GridSpec::box2(-1, 2, 0.01, 2, 20, 20, 0.025);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::half, kHalf, 20, o), std::invalid_argument);
  o.verify_grid = GridSpec::box2(-1, 2, 0.01, 2, 40, 40, 0.1);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::half, kHalf, 20, o), std::invalid_argument);
  o.verify_grid = GridSpec::box2(-1, 2, 0.01, 2, 40, 40, 0.05);
  EXPECT_NO_THROW(capacity_lower(seg, CapacityMode::half, kHalf, 20, o));
  const auto d = default_verify_grid(*o.grid);
  EXPECT_EQ(d.resolution, (std::vector<int>{40, 40}));
  EXPECT_DOUBLE_EQ(d.exclusion, 0.025);
}

TEST(Capacity, MonotoneUnderInclusion) {
  // The 200 midpoint atoms of [0, 1/2] are exactly the first half of the 400
  // atoms of [0, 1]; both runs share one explicit grid.
  CapacityOptions o = experiments::horizontal_segment_options(400, 1.0);
  Segment half_seg, full_seg;
  half_seg.length = 0.5;
  const auto a = capacity_lower(half_seg, CapacityMode::half, kHalf, 200, o);
  const auto b = capacity_lower(full_seg, CapacityMode::half, kHalf, 400, o);
  EXPECT_LE(a.lp_value, b.lp_value + 1e-9);
  EXPECT_LE(a.lower, b.lower + 1e-9);
}

TEST(Capacity, TildeNeverExceedsHalf) {
  Segment seg;
  seg.orientation = Orientation::vertical;
  const auto o = experiments::vertical_segment_options(32);
  const auto h = capacity_lower(seg, CapacityMode::half, kHalf, 32, o);
  const auto t = capacity_lower(seg, CapacityMode::tilde, kHalf, 32, o);
  EXPECT_LE(t.lp_value, h.lp_value + 1e-9);
  EXPECT_LE(t.lower, h.lower + 1e-9);
}

TEST(Capacity, LowerBelowTenTimesUpper) {
  Segment hs, vs;
  vs.orientation = Orientation::vertical;
  for (const auto& est : {capacity_lower(hs, CapacityMode::half, kHalf, 50, experiments::horizontal_segment_options(50)),
                          capacity_lower(vs, CapacityMode::half, kHalf, 32, experiments::vertical_segment_options(32)),
                          capacity_lower(UnionOfCubes{cantor(2).cubes}, CapacityMode::growth_s, kHalf, 0)}) {
    EXPECT_GT(est.upper, 0.0);
    EXPECT_LE(est.lower, 10.0 * est.upper) << est.set;
  }
}

TEST(Capacity, DeterministicAndJsonKeyOrder) {
  Segment seg;
  seg.orientation = Orientation::vertical;
  const auto o = experiments::vertical_segment_options(16);
  const auto a = capacity_lower(seg, CapacityMode::half, kHalf, 16, o);
  const auto b = capacity_lower(seg, CapacityMode::half, kHalf, 16, o);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.lower, b.lower);
  const auto j = to_json(a);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected = {"mode", "s", "N", "set", "lower", "upper", "rescale_factor",
                                             "atoms", "constraints", "grid", "verify_grid", "runtime_ms"};
  EXPECT_EQ(keys, expected);
  EXPECT_EQ(j["mode"], "half");
  EXPECT_EQ(j["set"], "vertical segment");
  EXPECT_TRUE(to_json(capacity_lower(UnionOfCubes{cantor(1).cubes}, CapacityMode::growth_s, kHalf, 0))["grid"].is_null());
}

TEST(Capacity, ArgumentChecks) {
  Segment seg;
  const auto o = experiments::horizontal_segment_options(20);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::half, FracParams(0.75, 1), 20, o), std::invalid_argument);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::tilde, FracParams(0.3, 1), 20, o), std::invalid_argument);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::growth_s, FracParams(1.0, 1), 20, o), std::invalid_argument);
  EXPECT_THROW(capacity_lower(seg, CapacityMode::half, kHalf, 20), std::invalid_argument);
  CapacityOptions few = o;
  few.max_cols = 10;
  EXPECT_THROW(capacity_lower(seg, CapacityMode::half, kHalf, 20, few), std::invalid_argument);
  EXPECT_THROW(parse_capacity_mode("full"), std::invalid_argument);
  EXPECT_EQ(parse_capacity_mode("tilde"), CapacityMode::tilde);
}

TEST(ConstraintGeneration, MatchesFullLp) {
  std::mt19937 gen(12);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 15, m = 600;
    std::vector<std::vector<double>> A(m, std::vector<double>(n));
    std::vector<double> b(m);
    for (auto& r : A)
      for (double& v : r) v = U(gen) < 0.3 ? U(gen) : 0.0;
    for (double& v : b) v = 0.5 + U(gen);
    for (std::size_t i = 0; i < n; ++i) A[i][i] += 0.1;
    RowSource src{m, n, [&](std::size_t j, std::vector<double>& out) { out = A[j]; }, [&](std::size_t j) { return b[j]; }};
    const auto g = solve_by_constraint_generation(src, 5000, 20, 1e-12);
    EXPECT_FALSE(g.cap_hit);
    EXPECT_LT(g.active, m);
    LPProblem full{std::vector<double>(n, 1.0), A, b};
    EXPECT_NEAR(g.solution.value, lp_maximize(full).value, 1e-9);
  }
}

TEST(ConstraintGeneration, RowCapReported) {
  // The seed holds rows 0 and 1; row 2 is violated but the cap is reached.
  const std::vector<std::vector<double>> A = {{1, 0}, {0, 1}, {1, 1}};
  RowSource src{3, 2, [&](std::size_t j, std::vector<double>& out) { out = A[j]; }, [](std::size_t) { return 1.0; }};
  const auto g = solve_by_constraint_generation(src, 1, 1, 1e-12);
  EXPECT_TRUE(g.cap_hit);
  EXPECT_DOUBLE_EQ(g.solution.value, 2.0);
  const auto full = solve_by_constraint_generation(src, 10, 1, 1e-12);
  EXPECT_FALSE(full.cap_hit);
  EXPECT_DOUBLE_EQ(full.solution.value, 1.0);
  RowSource empty{2, 2, [](std::size_t, std::vector<double>& out) { out = {1.0, 0.0}; }, [](std::size_t) { return 1.0; }};
  EXPECT_THROW(solve_by_constraint_generation(empty, 10, 1, 1e-12), std::invalid_argument);
}

TEST(CornerSums, GrowWithDepthAndAreStable) {
  CantorSpec spec;
  const double s2 = cantor_corner_sum(spec, 0, 2), s4 = cantor_corner_sum(spec, 0, 4), s8 = cantor_corner_sum(spec, 0, 8);
  EXPECT_GT(s2, 0.0);
  EXPECT_LT(s2, s4);
  EXPECT_LT(s4, s8);
  EXPECT_GE(s8 / s2, 2.5);
  // Self-similarity: the sum at k = 1 is the k = 0 sum up to boundary effects.
  EXPECT_NEAR(cantor_corner_sum(spec, 1, 4) / s4, 1.0, 0.3);
  EXPECT_THROW(cantor_corner_sum(spec, 0, 0), std::invalid_argument);
  EXPECT_THROW(cantor_corner_sum(spec, -1, 2), std::invalid_argument);
  EXPECT_THROW(cantor_corner_sum(spec, 5, 8), std::invalid_argument);
}
