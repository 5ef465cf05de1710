#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fraccap/geometry.hpp"
#include "fraccap/measures.hpp"

using namespace fraccap;

namespace {

SpacetimePoint pt(double x, double t) { return SpacetimePoint({x}, t); }

}  // namespace

TEST(DistP, HalfOrderIsMaxOfSpaceAndTime) {
  EXPECT_DOUBLE_EQ(dist_p(pt(0, 0), pt(3, 4), FracParams(0.5, 1)), 4.0);
}

TEST(DistP, QuarterOrderSquaresTheTimeGap) {
  EXPECT_DOUBLE_EQ(dist_p(pt(0, 0), pt(3, 4), FracParams(0.25, 1)), 16.0);
}

TEST(DistP, IdenticalPointsAreAtZeroDistance) {
  EXPECT_EQ(dist_p(pt(1.5, -2), pt(1.5, -2), FracParams(0.7, 1)), 0.0);
}

TEST(DistP, DimensionMismatchThrows) {
  SpacetimePoint a({0.0, 0.0}, 0.0);
  EXPECT_THROW(dist_p(a, pt(1, 1), FracParams(0.5, 1)), std::invalid_argument);
  EXPECT_THROW(dist_p(a, a, FracParams(0.5, 1)), std::invalid_argument);
}

TEST(DistP, MetricAxiomsOnRandomTriples) {
  // |dt|^{1/2s} is subadditive only for s >= 1/2.
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> U(-5, 5);
  for (double s : {0.5, 0.8, 1.0}) {
    const FracParams params(s, 2);
    for (int i = 0; i < 2000; ++i) {
      SpacetimePoint a({U(gen), U(gen)}, U(gen)), b({U(gen), U(gen)}, U(gen)), c({U(gen), U(gen)}, U(gen));
      const double ab = dist_p(a, b, params), bc = dist_p(b, c, params), ac = dist_p(a, c, params);
      EXPECT_EQ(ab, dist_p(b, a, params));
      EXPECT_GT(ab, 0.0);
      EXPECT_LE(ac, (ab + bc) * (1.0 + 1e-15));
    }
  }
}

TEST(DistP, QuasiTriangleBelowHalfOrder) {
  // For s < 1/2 only a quasi-triangle inequality with constant 2^{1/2s - 1} holds.
  const FracParams params(0.25, 1);
  EXPECT_DOUBLE_EQ(dist_p(pt(0, 0), pt(0, 2), params), 4.0);
  EXPECT_DOUBLE_EQ(dist_p(pt(0, 0), pt(0, 1), params) + dist_p(pt(0, 1), pt(0, 2), params), 2.0);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int i = 0; i < 2000; ++i) {
    const auto a = pt(U(gen), U(gen)), b = pt(U(gen), U(gen)), c = pt(U(gen), U(gen));
    EXPECT_LE(dist_p(a, c, params), 2.0 * (dist_p(a, b, params) + dist_p(b, c, params)) * (1 + 1e-15));
  }
}

TEST(Dilate, Examples) {
  const auto a = dilate(pt(1, 1), 2.0, FracParams(0.5, 1));
  EXPECT_DOUBLE_EQ(a.x[0], 2.0);
  EXPECT_DOUBLE_EQ(a.t, 2.0);
  const auto b = dilate(pt(1, 1), 2.0, FracParams(0.25, 1));
  EXPECT_DOUBLE_EQ(b.x[0], 2.0);
  EXPECT_NEAR(b.t, 1.4142135623730951, 1e-15);
  const auto c = dilate(pt(0.3, -0.7), 1.0, FracParams(0.6, 1));
  EXPECT_EQ(c, pt(0.3, -0.7));
}

TEST(Dilate, RejectsNonPositiveFactor) {
  EXPECT_THROW(dilate(pt(1, 1), 0.0, FracParams(0.5, 1)), std::invalid_argument);
  EXPECT_THROW(dilate(pt(1, 1), -1.0, FracParams(0.5, 1)), std::invalid_argument);
}

TEST(Dilate, DistanceIsCovariant) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> U(-3, 3), L(0.01, 50);
  for (double s : {0.3, 0.5, 0.75}) {
    const FracParams params(s, 1);
    for (int i = 0; i < 100; ++i) {
      const auto a = pt(U(gen), U(gen)), b = pt(U(gen), U(gen));
      const double lam = L(gen);
      const double lhs = dist_p(dilate(a, lam, params), dilate(b, lam, params), params);
      EXPECT_NEAR(lhs / (lam * dist_p(a, b, params)), 1.0, 1e-12);
    }
  }
}

TEST(ParabolicNorm, MatchesDistanceToOrigin) {
  const FracParams params(0.75, 1);
  EXPECT_DOUBLE_EQ(parabolic_norm(pt(0.5, 8.0), params), dist_p(pt(0, 0), pt(0.5, 8.0), params));
}

TEST(ParabolicCube, TimeLengthFollowsOrder) {
  const FracParams params(0.3, 1);
  const auto q = ParabolicCube::make({0.0}, 0.2, 1.0, params);
  EXPECT_NEAR(q.time_length, std::pow(0.2, 0.6), 1e-15);
  EXPECT_TRUE(q.is_parabolic(params));
  EXPECT_TRUE(q.contains(pt(0.1, 1.1)));
  EXPECT_FALSE(q.contains(pt(0.3, 1.1)));
  EXPECT_THROW(ParabolicCube::make({0.0}, 0.0, 0.0, params), std::invalid_argument);
}

TEST(SetDescriptor, Validation) {
  Segment bad;
  bad.length = 0.0;
  EXPECT_THROW(validate(SetDescriptor{bad}), std::invalid_argument);
  EXPECT_THROW(validate(SetDescriptor{UnionOfCubes{}}), std::invalid_argument);
  EXPECT_THROW(validate(SetDescriptor{PointSet{}}), std::invalid_argument);
  EXPECT_THROW(hausdorff_content_upper(UnionOfCubes{}, 1.0, FracParams(0.5, 1), 3), std::invalid_argument);
}

TEST(Content, CantorGenerationCoverHasUnitSum) {
  const FracParams params(0.5, 1);
  for (int k = 0; k <= 4; ++k) {
    CantorSpec spec;
    spec.generation = k;
    const auto g = cantor_generation(spec);
    EXPECT_NEAR(hausdorff_content_upper(UnionOfCubes{g.cubes}, 1.0, params, k), 1.0, 1e-12) << "k=" << k;
  }
}

TEST(Content, SinglePointShrinks) {
  const FracParams params(0.5, 1);
  const PointSet p{{pt(0.3, 0.7)}};
  double prev = INFINITY;
  for (int j = 0; j <= 12; ++j) {
    const double v = hausdorff_content_upper(p, 1.0, params, j);
    EXPECT_LE(v, std::ldexp(1.0, -j + 1)) << "depth " << j;
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Content, UnitSegmentBetweenOneAndTwo) {
  Segment seg;
  const double v = hausdorff_content_upper(seg, 1.0, FracParams(0.5, 1), 6);
  EXPECT_GE(v, 1.0);
  EXPECT_LE(v, 2.0);
}

TEST(Content, NonincreasingInDepth) {
  Segment seg;
  seg.orientation = Orientation::vertical;
  for (double s : {0.3, 0.5, 0.8}) {
    const FracParams params(s, 1);
    double prev = INFINITY;
    for (int depth = 0; depth <= 8; ++depth) {
      const double v = hausdorff_content_upper(seg, params.critical_dimension(), params, depth);
      EXPECT_LE(v, prev) << "s=" << s << " depth=" << depth;
      prev = v;
    }
  }
}

TEST(Content, MonotoneUnderInclusionOfNestedCubes) {
  const FracParams params(0.5, 1);
  ContentOptions opt;
  opt.root = ParabolicCube::make({0.0}, 1.0, 0.0, params);
  double prev = INFINITY;
  for (int k = 0; k <= 4; ++k) {
    CantorSpec spec;
    spec.generation = k;
    const auto g = cantor_generation(spec);
    // d = 0.5 makes the sums differ between generations.
    const double v = hausdorff_content_upper(UnionOfCubes{g.cubes}, 0.5, params, 8, opt);
    EXPECT_LE(v, prev);
    prev = v;
  }
  // A sub-union of one generation.
  CantorSpec spec;
  spec.generation = 2;
  const auto g = cantor_generation(spec);
  std::vector<ParabolicCube> half(g.cubes.begin(), g.cubes.begin() + 8);
  EXPECT_LE(hausdorff_content_upper(UnionOfCubes{half}, 0.5, params, 8, opt),
            hausdorff_content_upper(UnionOfCubes{g.cubes}, 0.5, params, 8, opt));
}

TEST(Content, ReportCarriesMetricAndDistortion) {
  Segment seg;
  ContentOptions opt;
  opt.metric = ContentMetric::euclidean;
  const auto rep = hausdorff_content_report(seg, 1.0, FracParams(0.5, 1), 4, opt);
  EXPECT_EQ(rep.metric, ContentMetric::euclidean);
  EXPECT_DOUBLE_EQ(rep.distortion, 1.0);
  const auto rep3 = hausdorff_content_report(seg, 1.0, FracParams(0.3, 1), 4);
  EXPECT_GT(rep3.distortion, 0.0);
  EXPECT_LE(rep3.distortion, 1.0);
}

TEST(BoundingBox, SegmentAndCubes) {
  Segment seg;
  seg.orientation = Orientation::vertical;
  seg.length = 2.0;
  seg.anchor = pt(1.0, -1.0);
  const Box b = bounding_box(seg, 1);
  EXPECT_EQ(b.lo, (std::vector<double>{1.0, -1.0}));
  EXPECT_EQ(b.hi, (std::vector<double>{1.0, 1.0}));
}
