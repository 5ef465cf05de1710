#ifndef FRACCAP_SIMPLEX_HPP
#define FRACCAP_SIMPLEX_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fraccap/errors.hpp"

namespace fraccap {

/// max c^T w subject to A w <= b, w >= 0, with A dense row-major.
struct LPProblem {
  std::vector<double> objective;
  std::vector<std::vector<double>> constraints;
  std::vector<double> rhs;

  std::size_t variables() const { return objective.size(); }
  std::size_t rows() const { return constraints.size(); }

  void validate() const {
    if (objective.empty() || constraints.empty()) throw std::invalid_argument("LPProblem: need >= 1 row and column");
    if (rhs.size() != constraints.size()) throw std::invalid_argument("LPProblem: rhs size mismatch");
    for (const auto& r : constraints) {
      if (r.size() != objective.size()) throw std::invalid_argument("LPProblem: row length mismatch");
      for (double v : r)
        if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite coefficient");
    }
    for (double v : rhs)
      if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite rhs");
    for (double v : objective)
      if (!std::isfinite(v)) throw std::invalid_argument("LPProblem: non-finite objective");
  }
};

struct LPSolution {
  double value = 0.0;
  std::vector<double> weights;
  std::size_t pivots = 0;
};

struct SimplexOptions {
  double eps = 1e-9;
  std::size_t max_pivots = 5'000'000;
};

namespace detail {

/// Dense tableau simplex with a single artificial column for phase 1.
/// Entering and leaving variables follow Bland's rule (lowest label among
/// the eligible ones), so the pivot sequence is deterministic and cannot
/// cycle.
class Tableau {
 public:
  Tableau(const LPProblem& p, const SimplexOptions& opt)
      : m_(static_cast<int>(p.rows())),
        n_(static_cast<int>(p.variables())),
        w_(n_ + 2),
        D_(static_cast<std::size_t>(m_ + 2) * (n_ + 2), 0.0),
        B_(m_),
        N_(n_ + 1),
        opt_(opt) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) at(i, j) = p.constraints[i][j];
    for (int i = 0; i < m_; ++i) {
      B_[i] = n_ + i;
      at(i, n_) = -1.0;
      at(i, n_ + 1) = p.rhs[i];
    }
    for (int j = 0; j < n_; ++j) {
      N_[j] = j;
      at(m_, j) = -p.objective[j];
    }
    N_[n_] = -1;
    at(m_ + 1, n_) = 1.0;
  }

  LPSolution solve() {
    int r = 0;
    for (int i = 1; i < m_; ++i)
      if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
    if (at(r, n_ + 1) < -opt_.eps) {
      pivot(r, n_);
      if (!run(2) || at(m_ + 1, n_ + 1) < -opt_.eps) throw LpInfeasible("lp_maximize: infeasible");
      for (int i = 0; i < m_; ++i)
        if (B_[i] == -1) {
          int s = -1;
          for (int j = 0; j <= n_; ++j)
            if (N_[j] != -1 && std::abs(at(i, j)) > opt_.eps && (s == -1 || N_[j] < N_[s])) s = j;
          if (s != -1) pivot(i, s);
        }
    }
    if (!run(1)) throw LpUnbounded("lp_maximize: unbounded objective");
    LPSolution out;
    out.weights.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (B_[i] >= 0 && B_[i] < n_) out.weights[B_[i]] = at(i, n_ + 1);
    out.value = at(m_, n_ + 1);
    out.pivots = pivots_;
    return out;
  }

 private:
  double& at(int i, int j) { return D_[static_cast<std::size_t>(i) * w_ + j]; }

  bool run(int phase) {
    const int x = m_ + phase - 1;
    for (;;) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (N_[j] == -phase) continue;
        if (phase == 1 && N_[j] == -1) continue;
        if (at(x, j) < -opt_.eps && (s == -1 || N_[j] < N_[s])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = at(i, s);
        if (a <= opt_.eps) continue;
        const double ratio = at(i, n_ + 1) / a;
        if (r == -1 || ratio < best - opt_.eps * std::max(1.0, std::abs(best)) ||
            (std::abs(ratio - best) <= opt_.eps * std::max(1.0, std::abs(best)) && B_[i] < B_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r == -1) return false;
      pivot(r, s);
    }
  }

  void pivot(int r, int s) {
    if (++pivots_ > opt_.max_pivots) throw NonConvergence("lp_maximize: pivot limit reached");
    double* a = &at(r, 0);
    const double inv = 1.0 / a[s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      double* b = &at(i, 0);
      if (std::abs(b[s]) <= opt_.eps * 1e-3) continue;
      const double f = b[s] * inv;
      for (int j = 0; j < n_ + 2; ++j) b[j] -= a[j] * f;
      b[s] = a[s] * f;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) a[j] *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) at(i, s) *= -inv;
    a[s] = inv;
    std::swap(B_[r], N_[s]);
  }

  int m_, n_;
  std::size_t w_;
  std::vector<double> D_;
  std::vector<int> B_, N_;
  SimplexOptions opt_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Optimal basic feasible solution of max c^T w, A w <= b, w >= 0. Throws
/// LpInfeasible or LpUnbounded.
inline LPSolution lp_maximize(const LPProblem& problem, const SimplexOptions& opt = {}) {
  problem.validate();
  detail::Tableau t(problem, opt);
  return t.solve();
}

}  // namespace fraccap

#endif
