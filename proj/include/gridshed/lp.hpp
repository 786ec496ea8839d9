#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gridshed {

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct LpOptions {
  double tol = 1e-9;        // reduced-cost and pivot tolerance
  int max_iterations = 0;   // 0 picks a size-based cap
};

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  double objective = 0.0;
  std::vector<double> x;  // structural variables only
  int iterations = 0;
  std::string detail;
};

/// Minimize c'x subject to Ax = b and lo <= x <= up. Inequalities are
/// expected to arrive as variable bounds (possibly on explicit slack
/// variables added by the caller); rows are equalities only.
class LinearProgram {
 public:
  int add_variable(double cost, double lower, double upper, std::string name = "") {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
      throw std::invalid_argument("lp: bad bounds for variable " + std::to_string(cost_.size()));
    cost_.push_back(cost);
    lower_.push_back(lower);
    upper_.push_back(upper);
    cols_.emplace_back();
    if (name.empty()) name = "x" + std::to_string(cols_.size() - 1);
    names_.push_back(std::move(name));
    return static_cast<int>(cols_.size() - 1);
  }

  int add_row(const std::vector<std::pair<int, double>>& coeffs, double rhs) {
    int row = static_cast<int>(rhs_.size());
    for (const auto& [var, coef] : coeffs) {
      if (var < 0 || var >= static_cast<int>(cols_.size()))
        throw std::invalid_argument("lp: row references unknown variable " + std::to_string(var));
      if (coef == 0.0) continue;
      auto& col = cols_[var];
      // repeated variables within one row accumulate
      if (!col.empty() && col.back().first == row) {
        col.back().second += coef;
      } else {
        col.emplace_back(row, coef);
      }
    }
    rhs_.push_back(rhs);
    return row;
  }

  std::size_t num_variables() const { return cols_.size(); }
  std::size_t num_rows() const { return rhs_.size(); }
  double cost(int j) const { return cost_[j]; }
  double lower(int j) const { return lower_[j]; }
  double upper(int j) const { return upper_[j]; }
  const std::string& name(int j) const { return names_[j]; }
  const std::vector<std::pair<int, double>>& column(int j) const { return cols_[j]; }
  double rhs(int i) const { return rhs_[i]; }

 private:
  std::vector<double> cost_, lower_, upper_, rhs_;
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<std::string> names_;
};

namespace detail {

/// Bounded-variable two-phase revised simplex with a dense explicit basis
/// inverse. Artificial variable i carries a single +/-1 entry in row i so
/// the starting basis inverse is its own transpose-free diagonal.
class SimplexSolver {
 public:
  SimplexSolver(const LinearProgram& lp, const LpOptions& options)
      : lp_(lp),
        m_(lp.num_rows()),
        n_(lp.num_variables()),
        tol_(options.tol > 0 ? options.tol : 1e-9) {
    max_iter_ = options.max_iterations > 0
                    ? options.max_iterations
                    : 10000 + 200 * static_cast<int>(m_ + n_);
    bland_after_ = 1000 + 10 * static_cast<int>(m_ + n_);
  }

  LpSolution solve() {
    LpSolution result;
    setup();

    // phase 1: minimize total artificial mass
    phase1_ = true;
    LpStatus st = iterate();
    if (st == LpStatus::Unbounded) st = LpStatus::NumericalFailure;
    if (st != LpStatus::Optimal) {
      result.status = st;
      result.iterations = iterations_;
      result.detail = "phase 1 failed";
      return result;
    }
    double infeas = 0.0;
    for (std::size_t j = n_; j < total_; ++j) infeas += std::abs(value_[j]);
    if (infeas > feas_eps()) {
      result.status = LpStatus::Infeasible;
      result.iterations = iterations_;
      result.detail = "phase 1 residual " + std::to_string(infeas);
      return result;
    }
    for (std::size_t j = n_; j < total_; ++j) value_[j] = 0.0;
    drive_out_artificials();
    // artificials are pinned at zero from here on
    for (std::size_t j = n_; j < total_; ++j) {
      lo_[j] = 0.0;
      up_[j] = 0.0;
    }

    phase1_ = false;
    st = iterate();
    result.iterations = iterations_;
    if (st != LpStatus::Optimal) {
      result.status = st;
      return result;
    }
    return finish(result);
  }

 private:
  static constexpr double kPivotEps = 1e-9;

  double feas_eps() const { return std::max(1e-7, tol_ * 10.0); }

  void setup() {
    total_ = n_ + m_;
    value_.assign(total_, 0.0);
    lo_.resize(total_);
    up_.resize(total_);
    in_basis_.assign(total_, false);
    at_upper_.assign(total_, false);

    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = lp_.lower(static_cast<int>(j));
      up_[j] = lp_.upper(static_cast<int>(j));
      if (std::isfinite(lo_[j])) {
        value_[j] = lo_[j];
      } else if (std::isfinite(up_[j])) {
        value_[j] = up_[j];
        at_upper_[j] = true;
      } else {
        value_[j] = 0.0;  // nonbasic free, sits at zero until it enters
      }
    }

    std::vector<double> residual(m_);
    for (std::size_t i = 0; i < m_; ++i) residual[i] = lp_.rhs(static_cast<int>(i));
    for (std::size_t j = 0; j < n_; ++j) {
      if (value_[j] == 0.0) continue;
      for (const auto& [row, coef] : lp_.column(static_cast<int>(j)))
        residual[static_cast<std::size_t>(row)] -= coef * value_[j];
    }

    art_sign_.resize(m_);
    basis_.resize(m_);
    binv_.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      art_sign_[i] = residual[i] >= 0.0 ? 1.0 : -1.0;
      std::size_t a = n_ + i;
      lo_[a] = 0.0;
      up_[a] = kLpInfinity;
      value_[a] = std::abs(residual[i]);
      basis_[i] = a;
      in_basis_[a] = true;
      binv_[i * m_ + i] = art_sign_[i];
    }
    pivots_since_refactor_ = 0;
    iterations_ = 0;
  }

  double cost_of(std::size_t j) const {
    if (phase1_) return j >= n_ ? 1.0 : 0.0;
    return j >= n_ ? 0.0 : lp_.cost(static_cast<int>(j));
  }

  // w = Binv * A_j for structural j; artificial columns are +/- e_i
  void ftran(std::size_t j, std::vector<double>& w) const {
    std::fill(w.begin(), w.end(), 0.0);
    if (j >= n_) {
      std::size_t i = j - n_;
      for (std::size_t r = 0; r < m_; ++r) w[r] = binv_[r * m_ + i] * art_sign_[i];
      return;
    }
    for (const auto& [row, coef] : lp_.column(static_cast<int>(j))) {
      auto c = static_cast<std::size_t>(row);
      for (std::size_t r = 0; r < m_; ++r) w[r] += binv_[r * m_ + c] * coef;
    }
  }

  void compute_duals(std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      double cb = cost_of(basis_[r]);
      if (cb == 0.0) continue;
      for (std::size_t i = 0; i < m_; ++i) y[i] += cb * binv_[r * m_ + i];
    }
  }

  double reduced_cost(std::size_t j, const std::vector<double>& y) const {
    double d = cost_of(j);
    if (j >= n_) {
      std::size_t i = j - n_;
      d -= y[i] * art_sign_[i];
    } else {
      for (const auto& [row, coef] : lp_.column(static_cast<int>(j)))
        d -= y[static_cast<std::size_t>(row)] * coef;
    }
    return d;
  }

  // +1 to increase the entering variable, -1 to decrease, 0 if ineligible
  int entering_direction(std::size_t j, double d) const {
    if (in_basis_[j]) return 0;
    if (lo_[j] == up_[j]) return 0;  // fixed, cannot move
    bool has_lo = std::isfinite(lo_[j]);
    bool has_up = std::isfinite(up_[j]);
    if (!has_lo && !has_up) {
      if (d < -tol_) return 1;
      if (d > tol_) return -1;
      return 0;
    }
    if (at_upper_[j]) return d > tol_ ? -1 : 0;
    return d < -tol_ ? 1 : 0;
  }

  LpStatus iterate() {
    std::vector<double> y(m_), w(m_);
    for (;; ++iterations_) {
      if (iterations_ > max_iter_) return LpStatus::NumericalFailure;
      bool bland = iterations_ > bland_after_;
      compute_duals(y);

      std::size_t enter = total_;
      int dir = 0;
      double best = tol_;
      for (std::size_t j = 0; j < total_; ++j) {
        if (phase1_ == false && j >= n_) break;  // artificials are pinned in phase 2
        double d = reduced_cost(j, y);
        int dj = entering_direction(j, d);
        if (dj == 0) continue;
        if (bland) {
          enter = j;
          dir = dj;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          dir = dj;
        }
      }
      if (enter == total_) return LpStatus::Optimal;

      ftran(enter, w);

      // ratio test: the entering variable moves by t >= 0 in direction dir,
      // basic variable r changes at rate -dir * w[r]
      double t_limit = kLpInfinity;
      std::size_t leave_pos = m_;  // m_ means the entering variable hits its own bound
      double leave_pivot = 0.0;
      bool leave_at_upper = false;

      if (dir > 0 && std::isfinite(up_[enter])) t_limit = up_[enter] - value_[enter];
      if (dir < 0 && std::isfinite(lo_[enter])) t_limit = value_[enter] - lo_[enter];

      for (std::size_t r = 0; r < m_; ++r) {
        double rate = -static_cast<double>(dir) * w[r];
        if (std::abs(rate) <= kPivotEps) continue;
        std::size_t bj = basis_[r];
        double t;
        bool to_upper;
        if (rate < 0.0) {
          if (!std::isfinite(lo_[bj])) continue;
          t = (value_[bj] - lo_[bj]) / (-rate);
          to_upper = false;
        } else {
          if (!std::isfinite(up_[bj])) continue;
          t = (up_[bj] - value_[bj]) / rate;
          to_upper = true;
        }
        if (t < 0.0) t = 0.0;  // tolerate roundoff just outside a bound
        bool better = t < t_limit - kPivotEps;
        bool tie = leave_pos != m_ && std::abs(t - t_limit) <= kPivotEps;
        // ties break on the larger pivot for stability; under Bland's rule
        // on the smaller basic index to guarantee termination
        bool take_tie = tie && (bland ? bj < basis_[leave_pos]
                                      : std::abs(w[r]) > std::abs(leave_pivot));
        if (better || take_tie || (leave_pos == m_ && t <= t_limit)) {
          t_limit = std::min(t, t_limit);
          leave_pos = r;
          leave_pivot = w[r];
          leave_at_upper = to_upper;
        }
      }

      if (!std::isfinite(t_limit)) return phase1_ ? LpStatus::NumericalFailure : LpStatus::Unbounded;

      // apply the step to all basic variables
      if (t_limit != 0.0) {
        for (std::size_t r = 0; r < m_; ++r) {
          if (w[r] == 0.0) continue;
          value_[basis_[r]] -= static_cast<double>(dir) * t_limit * w[r];
        }
      }

      if (leave_pos == m_) {
        // bound flip, basis unchanged
        value_[enter] = dir > 0 ? up_[enter] : lo_[enter];
        at_upper_[enter] = dir > 0;
        continue;
      }

      std::size_t leave = basis_[leave_pos];
      value_[enter] += static_cast<double>(dir) * t_limit;
      value_[leave] = leave_at_upper ? up_[leave] : lo_[leave];
      at_upper_[leave] = leave_at_upper;
      in_basis_[leave] = false;
      in_basis_[enter] = true;
      basis_[leave_pos] = enter;
      update_binv(leave_pos, w);

      if (++pivots_since_refactor_ >= 64) {
        if (!refactorize()) return LpStatus::NumericalFailure;
      }
    }
  }

  void update_binv(std::size_t r, const std::vector<double>& w) {
    double piv = w[r];
    double inv = 1.0 / piv;
    for (std::size_t c = 0; c < m_; ++c) binv_[r * m_ + c] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double f = w[i];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < m_; ++c) binv_[i * m_ + c] -= f * binv_[r * m_ + c];
    }
  }

  // Rebuilds binv_ by Gauss-Jordan on the current basis matrix and
  // recomputes basic values from the nonbasic ones. Returns false on a
  // (numerically) singular basis.
  bool refactorize() {
    std::vector<double> mat(m_ * 2 * m_, 0.0);
    std::size_t stride = 2 * m_;
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t j = basis_[c];
      if (j >= n_) {
        std::size_t i = j - n_;
        mat[i * stride + c] = art_sign_[i];
      } else {
        for (const auto& [row, coef] : lp_.column(static_cast<int>(j)))
          mat[static_cast<std::size_t>(row) * stride + c] = coef;
      }
      mat[c * stride + m_ + c] = 1.0;
    }
    for (std::size_t col = 0; col < m_; ++col) {
      std::size_t piv = col;
      double best = std::abs(mat[col * stride + col]);
      for (std::size_t r = col + 1; r < m_; ++r) {
        double v = std::abs(mat[r * stride + col]);
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best < 1e-12) return false;
      if (piv != col) {
        for (std::size_t c = 0; c < stride; ++c)
          std::swap(mat[piv * stride + c], mat[col * stride + c]);
      }
      double inv = 1.0 / mat[col * stride + col];
      for (std::size_t c = 0; c < stride; ++c) mat[col * stride + c] *= inv;
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == col) continue;
        double f = mat[r * stride + col];
        if (f == 0.0) continue;
        for (std::size_t c = 0; c < stride; ++c) mat[r * stride + c] -= f * mat[col * stride + c];
      }
    }
    // basis inverse maps row space through the permuted elimination result;
    // rows of the inverse live in the right half
    for (std::size_t r = 0; r < m_; ++r)
      for (std::size_t c = 0; c < m_; ++c) binv_[r * m_ + c] = mat[r * stride + m_ + c];

    recompute_basic_values();
    pivots_since_refactor_ = 0;
    return true;
  }

  void recompute_basic_values() {
    std::vector<double> rhs(m_);
    for (std::size_t i = 0; i < m_; ++i) rhs[i] = lp_.rhs(static_cast<int>(i));
    for (std::size_t j = 0; j < total_; ++j) {
      if (in_basis_[j] || value_[j] == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] -= art_sign_[j - n_] * value_[j];
      } else {
        for (const auto& [row, coef] : lp_.column(static_cast<int>(j)))
          rhs[static_cast<std::size_t>(row)] -= coef * value_[j];
      }
    }
    for (std::size_t r = 0; r < m_; ++r) {
      double v = 0.0;
      for (std::size_t c = 0; c < m_; ++c) v += binv_[r * m_ + c] * rhs[c];
      value_[basis_[r]] = v;
    }
  }

  // After phase 1, basic artificials at zero get swapped for any structural
  // column with a usable pivot in their row; rows with none are dependent
  // and keep a pinned artificial.
  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      std::size_t pick = total_;
      double pick_mag = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis_[j] || lo_[j] == up_[j]) continue;
        double alpha = 0.0;
        for (const auto& [row, coef] : lp_.column(static_cast<int>(j)))
          alpha += binv_[r * m_ + static_cast<std::size_t>(row)] * coef;
        if (std::abs(alpha) > pick_mag) {
          pick_mag = std::abs(alpha);
          pick = j;
        }
      }
      if (pick == total_) continue;
      std::vector<double> w(m_);
      ftran(pick, w);
      std::size_t old = basis_[r];
      in_basis_[old] = false;
      at_upper_[old] = false;
      value_[old] = 0.0;
      in_basis_[pick] = true;
      basis_[r] = pick;
      update_binv(r, w);  // degenerate swap, values do not move
      if (++pivots_since_refactor_ >= 64) refactorize();
    }
  }

  LpSolution finish(LpSolution result) {
    if (!refactorize()) {
      result.status = LpStatus::NumericalFailure;
      result.detail = "singular basis at finish";
      return result;
    }

    double max_bound_violation = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      if (std::isfinite(lo_[j]) && value_[j] < lo_[j]) {
        max_bound_violation = std::max(max_bound_violation, lo_[j] - value_[j]);
        value_[j] = lo_[j];
      }
      if (std::isfinite(up_[j]) && value_[j] > up_[j]) {
        max_bound_violation = std::max(max_bound_violation, value_[j] - up_[j]);
        value_[j] = up_[j];
      }
    }

    double max_residual = 0.0;
    std::vector<double> res(m_);
    for (std::size_t i = 0; i < m_; ++i) res[i] = -lp_.rhs(static_cast<int>(i));
    for (std::size_t j = 0; j < n_; ++j) {
      if (value_[j] == 0.0) continue;
      for (const auto& [row, coef] : lp_.column(static_cast<int>(j)))
        res[static_cast<std::size_t>(row)] += coef * value_[j];
    }
    for (std::size_t i = 0; i < m_; ++i)
      max_residual = std::max(max_residual, std::abs(res[i]) / (1.0 + std::abs(lp_.rhs(static_cast<int>(i)))));

    if (max_bound_violation > feas_eps() || max_residual > feas_eps()) {
      result.status = LpStatus::NumericalFailure;
      result.detail = "residual " + std::to_string(max_residual) + ", bound violation " +
                      std::to_string(max_bound_violation);
      return result;
    }

    result.status = LpStatus::Optimal;
    result.x.assign(value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_));
    result.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) result.objective += lp_.cost(static_cast<int>(j)) * result.x[j];
    return result;
  }

  const LinearProgram& lp_;
  std::size_t m_, n_, total_ = 0;
  double tol_;
  int max_iter_ = 0, bland_after_ = 0, iterations_ = 0, pivots_since_refactor_ = 0;
  bool phase1_ = true;

  std::vector<double> value_, lo_, up_, art_sign_, binv_;
  std::vector<std::size_t> basis_;
  std::vector<bool> in_basis_;
  std::vector<char> at_upper_;
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {}) {
  if (lp.num_rows() == 0 && lp.num_variables() == 0) {
    LpSolution trivial;
    trivial.status = LpStatus::Optimal;
    return trivial;
  }
  detail::SimplexSolver solver(lp, options);
  return solver.solve();
}

}  // namespace gridshed
