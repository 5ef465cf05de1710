#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "fraccap/experiments.hpp"
#include "fraccap/kernels.hpp"

using namespace fraccap;
using std::numbers::pi;

namespace {

const KernelProfile& profile(double s, int N = 1) {
  static std::map<std::pair<double, int>, KernelProfile> cache;
  auto it = cache.find({s, N});
  if (it == cache.end()) it = cache.emplace(std::make_pair(s, N), build_profile(FracParams(s, N))).first;
  return it->second;
}

SpacetimePoint pt(double x, double t) { return SpacetimePoint({x}, t); }

}  // namespace

TEST(Profile, ValueAtOriginInOneDimension) {
  // phi(0) = (1/pi) int_0^inf exp(-r^{2s}) dr = Gamma(1 + 1/2s) / pi.
  for (double s : {0.3, 0.5, 0.75, 1.0}) {
    const double expected = std::tgamma(1.0 + 1.0 / (2.0 * s)) / pi;
    EXPECT_NEAR(profile(s).values().front() / expected, 1.0, 1e-8) << "s=" << s;
  }
}

TEST(Profile, ValueAtOriginInTwoAndThreeDimensions) {
  EXPECT_NEAR(profile(0.5, 2).values().front(), 1.0 / (2.0 * pi), 1e-9);
  EXPECT_NEAR(profile(0.5, 3).values().front(), 1.0 / (pi * pi), 1e-9);
}

TEST(Profile, HalfOrderIsCauchy) {
  const auto& p = profile(0.5);
  for (double u : {0.0, 0.37, 1.0, 2.0, 7.5, 31.0, 250.0, 999.0})
    EXPECT_NEAR(p.phi(u) * pi * (1.0 + u * u), 1.0, 2e-5) << "u=" << u;
}

TEST(Profile, ComparableToPowerEnvelope) {
  for (double s : {0.3, 0.5, 0.75}) {
    const auto& p = profile(s);
    double lo = INFINITY, hi = 0.0;
    for (double u : experiments::logspace(1e-3, 5e3, 60)) {
      const double r = p.phi(u) * std::pow(1.0 + u * u, 0.5 * (1.0 + 2.0 * s));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 10.0) << "s=" << s;
  }
}

TEST(Profile, TailCoefficientMatchesAsymptotics) {
  // phi(u) ~ Gamma(1 + 2s) sin(pi s) / pi * u^{-1-2s} for N = 1.
  for (double s : {0.5, 0.75}) {
    const double c = std::tgamma(1.0 + 2.0 * s) * std::sin(pi * s) / pi;
    EXPECT_NEAR(profile(s).tail_coefficient() / c, 1.0, 1e-3) << "s=" << s;
  }
}

TEST(Profile, MonotoneDecreasing) {
  for (double s : {0.3, 0.75}) {
    const auto& v = profile(s).values();
    for (std::size_t i = 1; i < v.size(); ++i) ASSERT_LE(v[i], v[i - 1] * (1.0 + 1e-9)) << "s=" << s << " i=" << i;
  }
}

TEST(Profile, UnitMassByTrapezoid) {
  // Independent of the library's mass routine: trapezoid in log u on
  // [1e-6, u_max] plus the power tail, doubled for the negative half line.
  for (double s : {0.5, 0.75}) {
    const auto& p = profile(s);
    const auto us = experiments::logspace(1e-6, p.u_max(), 200000);
    double acc = p.phi(0.0) * 1e-6;
    for (std::size_t i = 1; i < us.size(); ++i) acc += 0.5 * (p.phi(us[i]) + p.phi(us[i - 1])) * (us[i] - us[i - 1]);
    acc += p.tail_coefficient() * std::pow(p.u_max(), -2.0 * s) / (2.0 * s);
    EXPECT_NEAR(2.0 * acc, 1.0, 1e-4) << "s=" << s;
  }
}

TEST(Profile, SaveLoadRoundTripIsBitExact) {
  const auto& p = profile(0.75);
  std::stringstream ss;
  save_profile(ss, p);
  const auto q = load_profile(ss);
  EXPECT_EQ(q.grid(), p.grid());
  EXPECT_EQ(q.values(), p.values());
  EXPECT_EQ(q.params(), p.params());
  EXPECT_EQ(q.normalization(), p.normalization());
  EXPECT_EQ(q.tail_coefficient(), p.tail_coefficient());
}

TEST(Profile, PaperRawHalfReproducesPrintedKernel) {
  const FracParams params(0.5, 1);
  const auto raw = to_paper_raw(profile(0.5));
  EXPECT_EQ(raw.normalization(), Normalization::paper_raw);
  EXPECT_NEAR(raw.tail_coefficient(), 1.0, 1e-12);
  const KernelKind k = make_profile_kernel(raw);
  for (double x : {0.0, 0.3, 2.0, 40.0})
    for (double t : {0.1, 1.0, 3.0}) EXPECT_NEAR(eval_kernel(k, pt(x, t), params) / eval_kernel(HalfKernel{}, pt(x, t), params), 1.0, 1e-4);
  EXPECT_THROW(to_paper_raw(profile(1.0)), std::invalid_argument);
}

TEST(Profile, ExtrapolationLimitEnforced) {
  const auto& p = profile(0.75);
  EXPECT_NO_THROW(p.phi(5.0 * p.u_max()));
  EXPECT_THROW(p.phi(11.0 * p.u_max()), std::domain_error);
}

TEST(Profile, RejectsUnsupportedArguments) {
  EXPECT_THROW(FracParams(0.0, 1), std::invalid_argument);
  EXPECT_THROW(FracParams(1.5, 1), std::invalid_argument);
  EXPECT_THROW(FracParams(0.5, 0), std::invalid_argument);
  EXPECT_THROW(build_profile(FracParams(0.5, 4)), std::invalid_argument);
  QuadratureSettings tight;
  tight.abs_tol = 1e-300;
  tight.panel_budget = 100;
  EXPECT_THROW(build_profile(FracParams(0.3, 1), tight), NonConvergence);
  EXPECT_THROW(KernelProfile(FracParams(0.5, 1), {0.0, 1.0}, {1.0, -1.0}, Normalization::fourier_normalized, {}),
               std::invalid_argument);
  EXPECT_THROW(KernelProfile(FracParams(0.5, 1), {0.1, 1.0}, {1.0, 1.0}, Normalization::fourier_normalized, {}),
               std::invalid_argument);
}

TEST(Kernels, ClosedFormValues) {
  const FracParams half(0.5, 1), heat(1.0, 1), s3(0.3, 1);
  EXPECT_DOUBLE_EQ(eval_kernel(HalfKernel{}, pt(1, 1), half), 0.5);
  EXPECT_DOUBLE_EQ(eval_kernel(HalfKernel{}, pt(1, -1), half), 0.0);
  EXPECT_DOUBLE_EQ(eval_kernel(HalfKernel{}, pt(0, 0), half), 0.0);
  EXPECT_DOUBLE_EQ(eval_kernel(HalfKernel{}, SpacetimePoint({3.0, 4.0}, 1.0), FracParams(0.5, 2)),
                   1.0 / std::pow(26.0, 1.5));
  EXPECT_NEAR(eval_kernel(GaussianKernel{}, pt(0, 1), heat), 1.0 / std::sqrt(4.0 * pi), 1e-15);
  EXPECT_NEAR(eval_kernel(GaussianKernel{}, pt(2, 1), heat), std::exp(-1.0) / std::sqrt(4.0 * pi), 1e-15);
  EXPECT_DOUBLE_EQ(eval_kernel(BGEnvelopeKernel{}, pt(0, 1), s3), 1.0);
  EXPECT_NEAR(eval_kernel(BGEnvelopeKernel{}, pt(1, 1), s3), std::pow(2.0, -0.8), 1e-15);
  const KernelKind prof = make_profile_kernel(profile(0.5));
  EXPECT_NEAR(eval_kernel(prof, pt(1, 1), half), 1.0 / (2.0 * pi), 1e-7);
}

TEST(Kernels, ConsistencyChecks) {
  EXPECT_THROW(eval_kernel(HalfKernel{}, pt(1, 1), FracParams(0.3, 1)), std::invalid_argument);
  EXPECT_THROW(eval_kernel(GaussianKernel{}, pt(1, 1), FracParams(0.5, 1)), std::invalid_argument);
  const KernelKind prof = make_profile_kernel(profile(0.5));
  EXPECT_THROW(eval_kernel(prof, pt(1, 1), FracParams(0.75, 1)), std::invalid_argument);
  EXPECT_THROW(eval_kernel(ProfileKernel{}, pt(1, 1), FracParams(0.5, 1)), std::invalid_argument);
  EXPECT_THROW(eval_kernel(HalfKernel{}, SpacetimePoint({1.0, 1.0}, 1.0), FracParams(0.5, 1)), std::invalid_argument);
}

TEST(Kernels, ParabolicScaling) {
  // P(lambda x, lambda^{2s} t) = lambda^{-N} P(x, t).
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> X(-3, 3), T(0.01, 3), L(-3, 3);
  for (double s : {0.3, 0.75}) {
    const FracParams params(s, 1);
    const KernelKind k = make_profile_kernel(profile(s));
    for (int i = 0; i < 1000; ++i) {
      const auto p = pt(X(gen), T(gen));
      const double lam = std::exp(L(gen));
      const double lhs = eval_kernel(k, dilate(p, lam, params), params);
      EXPECT_NEAR(lhs * lam / eval_kernel(k, p, params), 1.0, 1e-4);
    }
  }
}

TEST(Kernels, ComparableToEnvelopeAcrossOrders) {
  for (double s : {0.3, 0.5, 0.7}) {
    const auto e = experiments::envelope_check(s, 15);
    EXPECT_GT(e.ratio_min, 0.0);
    EXPECT_LE(e.spread(), 50.0) << "s=" << s;
  }
}

TEST(Kernels, FsIsBounded) {
  for (double s : {0.3, 0.75}) {
    double worst = 0.0;
    for (double u : experiments::logspace(1e-2, 1e6, 200)) worst = std::max(worst, profile_F(profile(s), u));
    EXPECT_LE(worst, 20.0);
    EXPECT_GT(worst, 0.0);
  }
  EXPECT_EQ(profile_F(profile(0.75), -1.0), 0.0);
}

TEST(Derivatives, HalfKernelClosedForms) {
  const FracParams half(0.5, 1);
  EXPECT_NEAR(eval_kernel_dt(HalfKernel{}, pt(1, 1), half), 0.0, 1e-15);
  EXPECT_NEAR(eval_kernel_dt(HalfKernel{}, pt(0, 2), half), -0.25, 1e-15);
  EXPECT_EQ(eval_kernel_dt(HalfKernel{}, pt(1, -1), half), 0.0);
  EXPECT_THROW(eval_kernel_dt(HalfKernel{}, pt(1, 0), half), std::domain_error);
  EXPECT_EQ(eval_kernel_gradient_x(HalfKernel{}, pt(0, 1), half)[0], 0.0);
  // d/dx t / (t^2 + x^2) at (1, 1) = -2xt / (t^2 + x^2)^2 = -1/2.
  EXPECT_NEAR(eval_kernel_gradient_x(HalfKernel{}, pt(1, 1), half)[0], -0.5, 1e-15);
}

TEST(Derivatives, GaussianSatisfiesHeatEquation) {
  const FracParams heat(1.0, 1);
  for (double x : {0.0, 0.5, 2.0})
    for (double t : {0.2, 1.0}) {
      const double dt = eval_kernel_dt(GaussianKernel{}, pt(x, t), heat);
      const double h = 1e-4;
      const double lap = (eval_kernel(GaussianKernel{}, pt(x + h, t), heat) - 2 * eval_kernel(GaussianKernel{}, pt(x, t), heat) +
                          eval_kernel(GaussianKernel{}, pt(x - h, t), heat)) / (h * h);
      EXPECT_NEAR(dt, lap, 1e-6);
    }
}

TEST(Derivatives, ProfileHalfOrderMatchesCauchyKernel) {
  // P = t / (pi (t^2 + x^2)), dt P = (x^2 - t^2) / (pi (x^2 + t^2)^2) = -(-Delta)^{1/2} P.
  const FracParams half(0.5, 1);
  const KernelKind k = make_profile_kernel(profile(0.5));
  EXPECT_NEAR(eval_kernel_dt(k, pt(1, 1), half), 0.0, 1e-6);
  EXPECT_NEAR(eval_kernel_frac_laplacian(k, 0.5, pt(1, 1), half), 0.0, 1e-6);
  EXPECT_NEAR(eval_kernel_dt(k, pt(2, 1), half), 3.0 / (25.0 * pi), 1e-6);
  EXPECT_NEAR(eval_kernel_frac_laplacian(k, 0.5, pt(2, 1), half), -3.0 / (25.0 * pi), 1e-8);
  EXPECT_NEAR(eval_kernel_gradient_x(k, pt(1, 1), half)[0], -1.0 / (2.0 * pi), 1e-6);
}

TEST(Derivatives, FracLaplacianOfCauchyProfileClosedForm) {
  // (-Delta)^a of 1 / (pi (1 + z^2)) is Gamma(2a + 1) cos((2a + 1) atan z) / (pi (1 + z^2)^{(2a + 1)/2}).
  const auto& p = profile(0.5);
  for (double a : {0.25, 0.5, 0.75})
    for (double z : {0.1, 1.0, 5.0, 40.0, 100.0, 1000.0}) {
      const double exact =
          std::tgamma(2 * a + 1) * std::cos((2 * a + 1) * std::atan(z)) / (pi * std::pow(1 + z * z, a + 0.5));
      EXPECT_NEAR(p.frac_laplacian_profile(a, z), exact, 1e-6 * std::abs(exact) + 1e-10) << "a=" << a << " z=" << z;
    }
}

TEST(Derivatives, AsymptoticSeriesMatchesQuadratureAtSwitch) {
  // Both evaluators just around the switch radius must agree.
  for (double s : {0.3, 0.75}) {
    const auto& p = profile(s);
    const double z = p.quadrature().direct_limit;
    const double q = radial_transform(s, 1, z, 2 * s, p.quadrature()).value;
    const double a = radial_transform_series(s, 1, z, 2 * s);
    EXPECT_NEAR(a / q, 1.0, 1e-6) << "s=" << s;
  }
}

TEST(Derivatives, FracLaplacianArgumentChecks) {
  const FracParams params(0.75, 1);
  const KernelKind k = make_profile_kernel(profile(0.75));
  EXPECT_THROW(eval_kernel_frac_laplacian(k, 0.0, pt(1, 1), params), std::invalid_argument);
  EXPECT_THROW(eval_kernel_frac_laplacian(k, 1.0, pt(1, 1), params), std::invalid_argument);
  EXPECT_THROW(eval_kernel_frac_laplacian(HalfKernel{}, 0.5, pt(1, 1), FracParams(0.5, 1)), std::invalid_argument);
  EXPECT_EQ(eval_kernel_derivative(k, DerivativeKind::grad_x, pt(1, 1), params).size(), 1u);
}

TEST(Derivatives, DecayRatiosAreFinite) {
  const auto r = experiments::decay_ratios(0.75, 5);
  for (double v : {r.value, r.dt, r.grad}) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
  }
  for (double v : r.frac) EXPECT_TRUE(std::isfinite(v));
  EXPECT_LT(r.pde_max_rel_residual, 1e-4);
}
