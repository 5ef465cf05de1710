#ifndef FRACCAP_QUADRATURE_HPP
#define FRACCAP_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fraccap/errors.hpp"

namespace fraccap::quad {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
inline constexpr std::array<double, 8> xgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

/// One 15-point Kronrod rule with the embedded 7-point Gauss rule as error
/// estimate.
template <class F>
Estimate gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * detail::wgk[7];
  double resg = fc * detail::wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * detail::xgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += detail::wgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += detail::wg[j / 2] * (f1 + f2);
  }
  return {resk * h, std::abs((resk - resg) * h)};
}

/// Recursive bisection until the Kronrod-Gauss gap drops below `tol`.
/// `budget` counts remaining subintervals and is shared across calls.
template <class F>
Estimate adaptive(F&& f, double a, double b, double tol, std::size_t& budget, int max_depth = 60) {
  if (budget == 0) throw NonConvergence("adaptive quadrature: panel budget exhausted");
  --budget;
  const Estimate whole = gk15(f, a, b);
  if (whole.error <= tol || max_depth == 0 || b - a <= 1e-300) return whole;
  const double m = 0.5 * (a + b);
  const Estimate l = adaptive(f, a, m, 0.5 * tol, budget, max_depth - 1);
  const Estimate r = adaptive(f, m, b, 0.5 * tol, budget, max_depth - 1);
  return {l.value + r.value, l.error + r.error};
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    if (n < 1) throw std::invalid_argument("GaussLegendre: n must be >= 1");
    for (int i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (n == 1) {
      nodes[0] = 0.0;
      weights[0] = 2.0;
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(c + h * nodes[i]);
    return acc * h;
  }
};

}  // namespace fraccap::quad

#endif
