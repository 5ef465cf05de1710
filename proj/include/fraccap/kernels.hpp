#ifndef FRACCAP_KERNELS_HPP
#define FRACCAP_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fraccap/errors.hpp"
#include "fraccap/geometry.hpp"
#include "fraccap/quadrature.hpp"

namespace fraccap {

enum class Normalization { fourier_normalized, paper_raw };

inline const char* to_string(Normalization n) {
  return n == Normalization::fourier_normalized ? "fourier-normalized" : "paper-raw";
}

/// Settings of the oscillatory radial transform and of the tabulation.
struct QuadratureSettings {
  double abs_tol = 1e-10;            // per panel
  std::size_t panel_budget = 1'000'000;
  double envelope_cutoff = 1e-16;    // integrate while r^w e^{-r^{2s}} exceeds this
  double u_max = 1e3;                // table extent (s < 1)
  double direct_limit = 50.0;        // phi_smooth uses direct quadrature up to here
  double extrapolation_limit = 10.0; // evaluation allowed up to this multiple of u_max
};

namespace detail {

/// Radius beyond which r^w e^{-r^{2s}} stays below `cutoff`.
inline double transform_cutoff(double s, double w, double cutoff) {
  const double L = -std::log(cutoff);
  double r = std::pow(L, 1.0 / (2.0 * s));
  for (int i = 0; i < 50; ++i) {
    const double next = std::pow(L + std::max(0.0, w * std::log(r)), 1.0 / (2.0 * s));
    if (std::abs(next - r) <= 1e-12 * r) break;
    r = next;
  }
  return r;
}

inline double radial_weight(int N, double r, double u) {
  switch (N) {
    case 1:
      return std::cos(r * u) / std::numbers::pi;
    case 2:
      return r * std::cyl_bessel_j(0.0, r * u) / (2.0 * std::numbers::pi);
    case 3:
      if (u == 0.0) return r * r / (2.0 * std::numbers::pi * std::numbers::pi);
      return r * std::sin(r * u) / (2.0 * std::numbers::pi * std::numbers::pi * u);
    default:
      throw std::invalid_argument("radial transform: unsupported dimension N");
  }
}

}  // namespace detail

/// Inverse Fourier transform of the radial multiplier |xi|^{w} e^{-|xi|^{2s}}
/// in R^N evaluated at radius u. With w = 0 this is the kernel profile phi(u);
/// with w = 2 alpha it is (-Delta)^alpha phi(u).
///
/// The half line is cut into panels of half-period pi/u once u > 1 (unit
/// panels otherwise), each integrated adaptively with Gauss-Kronrod 15.
inline quad::Estimate radial_transform(double s, int N, double u, double w,
                                       const QuadratureSettings& q = {}) {
  if (N < 1 || N > 3) throw std::invalid_argument("radial_transform: N must be 1, 2 or 3");
  if (u < 0.0) throw std::invalid_argument("radial_transform: u must be >= 0");
  const double two_s = 2.0 * s;
  const double r_max = detail::transform_cutoff(s, w + (N - 1), q.envelope_cutoff);
  auto integrand = [&](double r) {
    if (r <= 0.0) return (w == 0.0) ? detail::radial_weight(N, 0.0, u) : 0.0;
    const double rp = (two_s == 1.0) ? r : (two_s == 2.0 ? r * r : std::pow(r, two_s));
    double env = std::exp(-rp);
    if (w != 0.0) env *= std::pow(r, w);
    return env * detail::radial_weight(N, r, u);
  };
  const double panel = (u > 1.0) ? std::numbers::pi / u : 1.0;
  std::size_t budget = q.panel_budget;
  quad::Estimate total;
  double a = 0.0;
  while (a < r_max) {
    const double b = a + panel;
    const auto piece = quad::adaptive(integrand, a, b, q.abs_tol, budget);
    total.value += piece.value;
    total.error += piece.error;
    a = b;
  }
  return total;
}

/// Large-u expansion of the same transform: the inverse transform of
/// |xi|^w e^{-|xi|^{2s}} is sum_k (-1)^k / k! F[|xi|^{w + 2ks}](u), where
/// F[|xi|^b](u) = 2^b Gamma((N + b)/2) / (pi^{N/2} Gamma(-b/2)) u^{-N-b}.
/// Only used with w > 0, where the k = 0 term does not vanish.
inline double radial_transform_series(double s, int N, double u, double w) {
  double acc = 0.0;
  double factorial = 1.0;
  for (int k = 0; k < 40; ++k) {
    if (k > 0) factorial *= k;
    const double b = w + 2.0 * k * s;
    const double h = 0.5 * b;
    if (std::abs(h - std::round(h)) < 1e-14) continue;  // 1/Gamma has a zero there
    const double c = std::pow(2.0, b) * std::tgamma(0.5 * (N + b)) /
                     (std::pow(std::numbers::pi, 0.5 * N) * std::tgamma(-h));
    const double term = (k % 2 ? -1.0 : 1.0) / factorial * c * std::pow(u, -N - b);
    acc += term;
    if (k > 2 && std::abs(term) < 1e-15 * std::abs(acc)) break;
  }
  return acc;
}

/// Tabulated radial profile phi with P_s(x, t) = t^{-N/(2s)} phi(|x| t^{-1/(2s)}).
class KernelProfile {
 public:
  KernelProfile() = default;

  /// Builds from an explicit table; `values` must be positive.
  KernelProfile(FracParams params, std::vector<double> grid, std::vector<double> values,
                Normalization normalization, QuadratureSettings settings)
      : params_(params),
        grid_(std::move(grid)),
        values_(std::move(values)),
        normalization_(normalization),
        settings_(settings) {
    if (grid_.size() != values_.size() || grid_.size() < 2)
      throw std::invalid_argument("KernelProfile: grid and values must match and hold >= 2 nodes");
    if (grid_.front() != 0.0) throw std::invalid_argument("KernelProfile: grid must start at 0");
    log_values_.resize(values_.size());
    log_grid_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (i > 0 && !(grid_[i] > grid_[i - 1]))
        throw std::invalid_argument("KernelProfile: grid must be strictly increasing");
      if (!(values_[i] > 0.0)) throw std::invalid_argument("KernelProfile: values must be positive");
      log_values_[i] = std::log(values_[i]);
      log_grid_[i] = grid_[i] > 0.0 ? std::log(grid_[i]) : -std::numeric_limits<double>::infinity();
    }
    const double um = grid_.back();
    tail_coefficient_ = values_.back() * std::pow(um, params_.N + 2.0 * params_.s);
  }

  const FracParams& params() const { return params_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  Normalization normalization() const { return normalization_; }
  const QuadratureSettings& quadrature() const { return settings_; }
  double u_max() const { return grid_.back(); }
  /// c in the tail law phi(u) = c u^{-(N+2s)} beyond u_max (s < 1; at s = 1
  /// the tail is phi(u_max) exp(-(u^2 - u_max^2) / 4)).
  double tail_coefficient() const { return tail_coefficient_; }
  bool gaussian_limit() const { return params_.s == 1.0; }

  /// Table interpolation: log phi is linear in u on the leading uniform
  /// part and linear in log u on the geometric part.
  double phi(double u) const {
    u = std::abs(u);
    const double um = grid_.back();
    if (u > um) {
      if (u > settings_.extrapolation_limit * um)
        throw std::domain_error("KernelProfile: argument beyond tail-extension validity");
      if (gaussian_limit()) return values_.back() * std::exp(-0.25 * (u * u - um * um));
      return tail_coefficient_ * std::pow(u, -(params_.N + 2.0 * params_.s));
    }
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), u);
    std::size_t hi = static_cast<std::size_t>(it - grid_.begin());
    if (hi >= grid_.size()) hi = grid_.size() - 1;
    const std::size_t lo = hi - 1;
    if (grid_[lo] < 1.0 || gaussian_limit()) {
      const double w = (u - grid_[lo]) / (grid_[hi] - grid_[lo]);
      return std::exp(log_values_[lo] + w * (log_values_[hi] - log_values_[lo]));
    }
    const double w = (std::log(u) - log_grid_[lo]) / (log_grid_[hi] - log_grid_[lo]);
    return std::exp(log_values_[lo] + w * (log_values_[hi] - log_values_[lo]));
  }

  /// Direct quadrature below direct_limit, table beyond. Used where the
  /// interpolant's piecewise slope would spoil finite differences.
  double phi_smooth(double u) const {
    u = std::abs(u);
    if (u <= settings_.direct_limit) return scale_ * radial_transform(params_.s, params_.N, u, 0.0, settings_).value;
    return phi(u);
  }

  /// (-Delta)^alpha phi at radius z (weighted transform), same normalization.
  /// Beyond direct_limit the asymptotic series replaces the oscillatory
  /// quadrature, whose panel count grows linearly in z.
  double frac_laplacian_profile(double alpha, double z) const {
    z = std::abs(z);
    if (z > settings_.direct_limit) return scale_ * radial_transform_series(params_.s, params_.N, z, 2.0 * alpha);
    return scale_ * radial_transform(params_.s, params_.N, z, 2.0 * alpha, settings_).value;
  }

  void set_direct_scale(double scale) { scale_ = scale; }

  /// Same table multiplied by a constant and relabelled.
  KernelProfile rescaled(double factor, Normalization label) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= factor;
    KernelProfile out(params_, grid_, std::move(v), label, settings_);
    out.scale_ = scale_ * factor;
    return out;
  }

 private:
  FracParams params_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> log_values_;
  std::vector<double> log_grid_;
  Normalization normalization_ = Normalization::fourier_normalized;
  QuadratureSettings settings_;
  double tail_coefficient_ = 0.0;
  double scale_ = 1.0;
};

namespace detail {

/// Tabulation nodes: 0, a uniform run up to 2, then geometric steps whose
/// ratio widens where log phi is close to a straight line in log u.
inline std::vector<double> profile_nodes(double u_max, bool uniform) {
  std::vector<double> g;
  if (uniform) {
    const int n = static_cast<int>(std::ceil(u_max / 0.01 - 1e-9));
    for (int i = 0; i <= n; ++i) g.push_back(std::min(0.01 * i, u_max));
    return g;
  }
  for (int i = 0; i <= 200; ++i) g.push_back(0.01 * i);
  double u = 2.0;
  while (u < u_max) {
    const double step = u < 20.0 ? 0.01 : (u < 200.0 ? 0.03 : 0.06);
    u *= std::exp(step);
    g.push_back(std::min(u, u_max));
  }
  return g;
}

}  // namespace detail

/// Tabulates the fourier-normalized profile of P_s.
inline KernelProfile build_profile(const FracParams& params, QuadratureSettings settings = {}) {
  if (params.N < 1 || params.N > 3) throw std::invalid_argument("build_profile: N must be 1, 2 or 3");
  // The s = 1 profile is Gaussian; past u = 8 it drops under the quadrature
  // floor and the table continues with the exact Gaussian tail.
  if (params.s == 1.0) settings.u_max = std::min(settings.u_max, 8.0);
  const auto grid = detail::profile_nodes(settings.u_max, params.s == 1.0);
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = radial_transform(params.s, params.N, grid[i], 0.0, settings).value;
    if (!(values[i] > 0.0))
      throw NonConvergence("build_profile: non-positive profile value at u = " + std::to_string(grid[i]));
  }
  return KernelProfile(params, grid, std::move(values), Normalization::fourier_normalized, settings);
}

/// Relabels a fourier-normalized profile so its tail coefficient is 1, the
/// convention of the printed s = 1/2 kernel t / (t^2 + |x|^2)^{(N+1)/2}.
inline KernelProfile to_paper_raw(const KernelProfile& p) {
  if (p.gaussian_limit()) throw std::invalid_argument("to_paper_raw: no power tail for s = 1");
  if (p.normalization() == Normalization::paper_raw) return p;
  return p.rescaled(1.0 / p.tail_coefficient(), Normalization::paper_raw);
}

// Flat text table: header "s N normalization u_max M", then M lines "u value".

inline void save_profile(std::ostream& os, const KernelProfile& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.17g %d %s %.17g %zu\n", p.params().s, p.params().N,
                to_string(p.normalization()), p.u_max(), p.grid().size());
  os << buf;
  for (std::size_t i = 0; i < p.grid().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.grid()[i], p.values()[i]);
    os << buf;
  }
}

inline KernelProfile load_profile(std::istream& is, QuadratureSettings settings = {}) {
  std::string header;
  if (!std::getline(is, header)) throw std::invalid_argument("load_profile: missing header");
  std::istringstream hs(header);
  std::string s_tok, norm_tok, umax_tok;
  int N = 0;
  std::size_t M = 0;
  if (!(hs >> s_tok >> N >> norm_tok >> umax_tok >> M))
    throw std::invalid_argument("load_profile: malformed header");
  Normalization norm;
  if (norm_tok == "fourier-normalized")
    norm = Normalization::fourier_normalized;
  else if (norm_tok == "paper-raw")
    norm = Normalization::paper_raw;
  else
    throw std::invalid_argument("load_profile: unknown normalization " + norm_tok);
  const FracParams params(std::strtod(s_tok.c_str(), nullptr), N);
  std::vector<double> grid(M), values(M);
  std::string line;
  for (std::size_t i = 0; i < M; ++i) {
    if (!std::getline(is, line)) throw std::invalid_argument("load_profile: truncated table");
    std::istringstream ls(line);
    std::string a, b;
    if (!(ls >> a >> b)) throw std::invalid_argument("load_profile: malformed row");
    grid[i] = std::strtod(a.c_str(), nullptr);
    values[i] = std::strtod(b.c_str(), nullptr);
  }
  settings.u_max = std::strtod(umax_tok.c_str(), nullptr);
  KernelProfile out(params, std::move(grid), std::move(values), norm, settings);
  if (norm == Normalization::paper_raw && !out.gaussian_limit()) {
    // Keep direct quadrature consistent with the stored table.
    const double raw = radial_transform(params.s, params.N, out.u_max(), 0.0, settings).value;
    out.set_direct_scale(out.values().back() / raw);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Kernel kinds

/// t / (t^2 + |x|^2)^{(N+1)/2} for t > 0, exactly as printed (s = 1/2).
struct HalfKernel {};
/// (4 pi t)^{-N/2} exp(-|x|^2 / 4t) for t > 0 (s = 1).
struct GaussianKernel {};
/// t / (t^{1/s} + |x|^2)^{(N+2s)/2} for t > 0.
struct BGEnvelopeKernel {};
struct ProfileKernel {
  std::shared_ptr<const KernelProfile> profile;
};

using KernelKind = std::variant<HalfKernel, GaussianKernel, ProfileKernel, BGEnvelopeKernel>;

inline KernelKind make_profile_kernel(KernelProfile p) {
  return ProfileKernel{std::make_shared<const KernelProfile>(std::move(p))};
}

inline std::string kernel_name(const KernelKind& k) {
  switch (k.index()) {
    case 0: return "half";
    case 1: return "gaussian";
    case 2: return "profile";
    default: return "bg-envelope";
  }
}

inline void check_consistent(const KernelKind& kind, const FracParams& params) {
  if (std::holds_alternative<HalfKernel>(kind) && !params.is_half())
    throw std::invalid_argument("Half kernel requires s = 1/2");
  if (std::holds_alternative<GaussianKernel>(kind) && params.s != 1.0)
    throw std::invalid_argument("Gaussian kernel requires s = 1");
  if (const auto* pk = std::get_if<ProfileKernel>(&kind)) {
    if (!pk->profile) throw std::invalid_argument("Profile kernel without a profile");
    if (!(pk->profile->params() == params))
      throw std::invalid_argument("Profile kernel built for different (s, N)");
  }
}

/// Kernel value from the spatial radius rho = |x| and time t. Hot path of
/// every potential evaluation; no consistency checks.
inline double radial_kernel(const KernelKind& kind, double rho, double t, const FracParams& params) {
  if (t <= 0.0) return 0.0;
  const int N = params.N;
  switch (kind.index()) {
    case 0: {
      const double r2 = t * t + rho * rho;
      if (N == 1) return t / r2;
      return t / std::pow(r2, 0.5 * (N + 1));
    }
    case 1: {
      return std::pow(4.0 * std::numbers::pi * t, -0.5 * N) * std::exp(-rho * rho / (4.0 * t));
    }
    case 2: {
      const auto& prof = *std::get<ProfileKernel>(kind).profile;
      const double scale = std::pow(t, -1.0 / (2.0 * params.s));
      return std::pow(scale, N) * prof.phi(rho * scale);
    }
    default: {
      const double a = std::pow(t, 1.0 / params.s) + rho * rho;
      return t / std::pow(a, 0.5 * (N + 2.0 * params.s));
    }
  }
}

inline double eval_kernel(const KernelKind& kind, const SpacetimePoint& p, const FracParams& params) {
  detail::require_dim(p, params, "eval_kernel");
  check_consistent(kind, params);
  return radial_kernel(kind, detail::spatial_norm(p.x.data(), params.N), p.t, params);
}

// ---------------------------------------------------------------------------
// Derivatives

enum class DerivativeKind { grad_x, dt, frac_laplacian };

struct DerivativeOptions {
  double relative_step = 1e-5;
  /// Profile kernels: recompute dt by Richardson extrapolation when it
  /// disagrees with -(-Delta)^s P_s by more than this relative amount.
  double consistency_tol = 1e-2;
  bool check_consistency = true;
};

namespace detail {

/// P_s through the smooth profile evaluator.
inline double profile_smooth_value(const KernelProfile& prof, double rho, double t) {
  if (t <= 0.0) return 0.0;
  const FracParams& params = prof.params();
  const double scale = std::pow(t, -1.0 / (2.0 * params.s));
  return std::pow(scale, params.N) * prof.phi_smooth(rho * scale);
}

inline double profile_frac_laplacian(const KernelProfile& prof, double alpha, double rho, double t) {
  if (t <= 0.0) return 0.0;
  const FracParams& params = prof.params();
  const double z = rho * std::pow(t, -1.0 / (2.0 * params.s));
  return std::pow(t, -params.N / (2.0 * params.s) - alpha / params.s) *
         prof.frac_laplacian_profile(alpha, z);
}

inline double radial_derivative(const KernelKind& kind, double rho, double t, const FracParams& params,
                                const DerivativeOptions& opt) {
  if (t <= 0.0) return 0.0;
  const int N = params.N;
  switch (kind.index()) {
    case 0:
      return -(N + 1) * rho * t / std::pow(rho * rho + t * t, 0.5 * (N + 3));
    case 1:
      return -rho / (2.0 * t) * radial_kernel(kind, rho, t, params);
    case 2: {
      const auto& prof = *std::get<ProfileKernel>(kind).profile;
      const double h = opt.relative_step * std::max(rho, std::pow(t, 1.0 / (2.0 * params.s)));
      return (profile_smooth_value(prof, rho + h, t) - profile_smooth_value(prof, rho - h, t)) / (2.0 * h);
    }
    default: {
      const double q = 0.5 * (N + 2.0 * params.s);
      const double a = std::pow(t, 1.0 / params.s) + rho * rho;
      return -q * t * std::pow(a, -q - 1.0) * 2.0 * rho;
    }
  }
}

}  // namespace detail

/// Spatial gradient of the kernel at p.
inline std::vector<double> eval_kernel_gradient_x(const KernelKind& kind, const SpacetimePoint& p,
                                                  const FracParams& params,
                                                  const DerivativeOptions& opt = {}) {
  detail::require_dim(p, params, "eval_kernel_gradient_x");
  check_consistent(kind, params);
  const double rho = detail::spatial_norm(p.x.data(), params.N);
  std::vector<double> g(params.N, 0.0);
  if (rho == 0.0 || p.t <= 0.0) return g;
  const double dr = detail::radial_derivative(kind, rho, p.t, params, opt);
  for (int i = 0; i < params.N; ++i) g[i] = dr * p.x[i] / rho;
  return g;
}

/// (-Delta_x)^alpha of the kernel; Profile kernels only.
inline double eval_kernel_frac_laplacian(const KernelKind& kind, double alpha, const SpacetimePoint& p,
                                         const FracParams& params) {
  detail::require_dim(p, params, "eval_kernel_frac_laplacian");
  check_consistent(kind, params);
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("frac_laplacian: alpha must lie in (0, 1)");
  const auto* pk = std::get_if<ProfileKernel>(&kind);
  if (!pk) throw std::invalid_argument("frac_laplacian: requires a Profile kernel");
  return detail::profile_frac_laplacian(*pk->profile, alpha, detail::spatial_norm(p.x.data(), params.N), p.t);
}

/// Time derivative of the kernel at p. The kernels jump across t = 0, so
/// t = 0 is rejected.
inline double eval_kernel_dt(const KernelKind& kind, const SpacetimePoint& p, const FracParams& params,
                             const DerivativeOptions& opt = {}) {
  detail::require_dim(p, params, "eval_kernel_dt");
  check_consistent(kind, params);
  const double t = p.t;
  if (t == 0.0) throw std::domain_error("eval_kernel_dt: kernel is not differentiable in t at t = 0");
  if (t < 0.0) return 0.0;
  const int N = params.N;
  const double rho = detail::spatial_norm(p.x.data(), N);
  switch (kind.index()) {
    case 0: {
      const double r2 = rho * rho + t * t;
      return 1.0 / std::pow(r2, 0.5 * (N + 1)) - (N + 1) * t * t / std::pow(r2, 0.5 * (N + 3));
    }
    case 1: {
      const double w = radial_kernel(kind, rho, t, params);
      return w * (-0.5 * N / t + rho * rho / (4.0 * t * t));
    }
    case 2: {
      const auto& prof = *std::get<ProfileKernel>(kind).profile;
      auto central = [&](double h) {
        return (detail::profile_smooth_value(prof, rho, t + h) - detail::profile_smooth_value(prof, rho, t - h)) /
               (2.0 * h);
      };
      const double h = opt.relative_step * t;
      double d = central(h);
      if (opt.check_consistency && params.s < 1.0) {
        const double target = -detail::profile_frac_laplacian(prof, params.s, rho, t);
        const double scale = std::max(std::abs(target), std::abs(d));
        if (std::abs(d - target) > opt.consistency_tol * scale) d = (4.0 * central(0.5 * h) - d) / 3.0;
      }
      return d;
    }
    default: {
      const double q = 0.5 * (N + 2.0 * params.s);
      const double a = std::pow(t, 1.0 / params.s) + rho * rho;
      return std::pow(a, -q) - q * t * std::pow(a, -q - 1.0) * std::pow(t, 1.0 / params.s - 1.0) / params.s;
    }
  }
}

/// Generic front door; scalar results come back as a one-element vector.
inline std::vector<double> eval_kernel_derivative(const KernelKind& kind, DerivativeKind which,
                                                  const SpacetimePoint& p, const FracParams& params,
                                                  double alpha = 0.5, const DerivativeOptions& opt = {}) {
  switch (which) {
    case DerivativeKind::grad_x:
      return eval_kernel_gradient_x(kind, p, params, opt);
    case DerivativeKind::dt:
      return {eval_kernel_dt(kind, p, params, opt)};
    default:
      return {eval_kernel_frac_laplacian(kind, alpha, p, params)};
  }
}

/// F_s(u) = P_s(e, u) for a unit spatial vector e, so that
/// P_s(x, t) = |x|^{-N} F_s(t / |x|^{2s}).
inline double profile_F(const KernelProfile& prof, double u) {
  if (u <= 0.0) return 0.0;
  const double scale = std::pow(u, -1.0 / (2.0 * prof.params().s));
  return std::pow(scale, prof.params().N) * prof.phi(scale);
}

}  // namespace fraccap

#endif
