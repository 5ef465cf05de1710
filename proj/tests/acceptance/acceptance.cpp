// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "fraccap/experiments.hpp"

using namespace fraccap;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0: no runtime limit
  std::function<Outcome()> body;
};

Outcome segment_potential() {
  const auto r = experiments::segment_potential({});
  Outcome o;
  o.pass = r.points.size() == 50 && r.max_abs_error <= 1e-3 && r.sup <= std::numbers::pi + 1e-6 && r.sup >= 3.0;
  o.detail = "max_err=" + fmt("%.3g", r.max_abs_error) + " sup=" + fmt("%.6f", r.sup) + " points=" +
             std::to_string(r.points.size());
  return o;
}

Outcome segment_capacity() {
  const auto e = experiments::horizontal_segment_capacity(400);
  Outcome o;
  o.pass = e.lower >= 0.30;
  o.detail = "lower=" + fmt("%.4f", e.lower) + " lp=" + fmt("%.4f", e.lp_value) + " rescale=" +
             fmt("%.4f", e.rescale_factor) + " target>=0.30 (1/pi=" + fmt("%.4f", 1.0 / std::numbers::pi) + ")";
  return o;
}

Outcome vertical_segment() {
  const auto seq = experiments::vertical_segment_sequence(2, 6);
  bool dec = seq.size() == 5;
  std::string vals;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) dec = dec && seq[i].estimate.lower < seq[i - 1].estimate.lower;
    vals += (i ? "," : "") + fmt("%.4f", seq[i].estimate.lower);
  }
  Outcome o;
  o.pass = dec && seq.back().estimate.lower < 0.5 * seq.front().estimate.lower;
  o.detail = "lower=[" + vals + "]";
  return o;
}

Outcome kernel_checks() {
  const auto r = experiments::kernel_cross_checks();
  const double expected = 1.0 / std::numbers::pi;
  const double half_dev = std::max(std::abs(r.half_ratio_max / expected - 1.0), std::abs(r.half_ratio_min / expected - 1.0));
  bool norm_ok = r.normalization_s.size() == 4;
  std::string norms;
  for (std::size_t i = 0; i < r.normalization_error.size(); ++i) {
    norm_ok = norm_ok && r.normalization_error[i] <= 1e-4;
    norms += (i ? "," : "") + fmt("%.2g", r.normalization_error[i]);
  }
  Outcome o;
  o.pass = half_dev <= 1e-3 && r.gaussian_max_rel_error <= 1e-3 && norm_ok;
  o.detail = "half_rel_dev=" + fmt("%.2g", half_dev) + " gauss_rel=" + fmt("%.2g", r.gaussian_max_rel_error) +
             " mass_err(s=0.3,0.5,0.75,1)=[" + norms + "]";
  return o;
}

Outcome envelope() {
  Outcome o;
  o.pass = true;
  for (double s : {0.3, 0.7}) {
    const auto e = experiments::envelope_check(s);
    o.pass = o.pass && e.spread() <= 50.0;
    o.detail += "s=" + fmt("%.1f", s) + ":max/min=" + fmt("%.3f", e.spread()) + " ";
  }
  return o;
}

Outcome decay() {
  const auto r = experiments::decay_ratios(0.75);
  bool finite = std::isfinite(r.value) && std::isfinite(r.dt) && std::isfinite(r.grad);
  for (double v : r.frac) finite = finite && std::isfinite(v);
  Outcome o;
  o.pass = finite && r.pde_points == 20 && r.pde_max_rel_residual <= 1e-2;
  o.detail = "max value=" + fmt("%.3f", r.value) + " dt=" + fmt("%.3f", r.dt) + " grad=" + fmt("%.3f", r.grad) +
             " frac=[";
  for (std::size_t i = 0; i < r.frac.size(); ++i) o.detail += (i ? "," : "") + fmt("%.3f", r.frac[i]);
  o.detail += "] pde_rel=" + fmt("%.2g", r.pde_max_rel_residual) + " at " + std::to_string(r.pde_points) + " points";
  return o;
}

Outcome cantor_data() {
  const auto checks = experiments::cantor_data_checks(6, 1);
  Outcome o;
  o.pass = checks.size() == 7;
  double worst = 0.0;
  for (const auto& c : checks) {
    o.pass = o.pass && c.exact && c.growth <= 4.0;
    worst = std::max(worst, c.growth);
  }
  o.detail = "k<=6 exact data, max growth=" + fmt("%.4f", worst);
  return o;
}

Outcome cantor_decay() {
  const auto levels = experiments::cantor_decay(4);
  bool mono = levels.size() == 4;
  std::string vals;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0) mono = mono && levels[i].estimate.lower <= levels[i - 1].estimate.lower;
    vals += (i ? "," : "") + fmt("%.4f", levels[i].estimate.lower);
  }
  Outcome o;
  o.pass = mono && levels.back().estimate.lower < 0.5 * levels.front().estimate.lower;
  o.detail = "lower(k=1..4)=[" + vals + "] need k4 < k1/2";
  return o;
}

Outcome corner_sums() {
  CantorSpec spec;
  const double a = cantor_corner_sum(spec, 0, 2), b = cantor_corner_sum(spec, 0, 8);
  Outcome o;
  o.pass = a > 0.0 && b / a >= 2.5;
  o.detail = "m=2:" + fmt("%.4f", a) + " m=8:" + fmt("%.4f", b) + " ratio=" + fmt("%.3f", b / a);
  return o;
}

Outcome localization() {
  const auto r = experiments::localization(20, 7, 24, {41, 81, 161});
  Outcome o;
  o.pass = r.constants.size() == 60 && r.c_loc <= 10.0;
  o.detail = "c_loc=" + fmt("%.4f", r.c_loc) + " median=" + fmt("%.4f", r.json["median"].get<double>()) +
             " min=" + fmt("%.4f", r.json["min"].get<double>());
  return o;
}

Outcome regularity() {
  const auto r = experiments::growth_regularity({});
  Outcome o;
  o.pass = r.cubes == 50 && r.lip <= 20.0 && r.bmo <= 20.0;
  o.detail = "lip=" + fmt("%.4f", r.lip) + " bmo=" + fmt("%.4f", r.bmo) + " cubes=" + std::to_string(r.cubes);
  return o;
}

Outcome tail_bound() {
  const auto r = experiments::fs_tail_bound(0.75, 30);
  Outcome o;
  o.pass = r.t.size() == 30 && r.constant <= 20.0;
  o.detail = "max |D F|*max(1,|t|)=" + fmt("%.4f", r.constant);
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "segment potential closed form", 10, segment_potential},
      {2, "segment capacity lower bound", 120, segment_capacity},
      {3, "vertical segment vanishing", 120, vertical_segment},
      {4, "kernel cross-checks", 30, kernel_checks},
      {5, "power-law envelope", 30, envelope},
      {6, "derivative decay ratios", 60, decay},
      {7, "cantor construction and growth", 0, cantor_data},
      {8, "cantor capacity decay", 180, cantor_decay},
      {9, "cantor corner growth", 60, corner_sums},
      {10, "localization", 120, localization},
      {11, "growth implies regularity", 180, regularity},
      {12, "F_s tail bound", 60, tail_bound},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0 || secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s criterion %2d (%s): %s runtime=%.1fs%s\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.detail.c_str(), secs, in_time ? "" : " (over budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
