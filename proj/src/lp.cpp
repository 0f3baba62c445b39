// SPDX-License-Identifier: Apache-2.0
#include "iotu/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace iotu {

namespace {
constexpr double kFeasTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kRefactorEvery = 120;
constexpr int kBlandTrigger = 300;
}  // namespace

LpSolver::LpSolver(const LpInstance& inst) : n_(inst.ncols), m_(static_cast<int>(inst.rows.size())) {
  cols_.assign(static_cast<size_t>(n_), {});
  rhs_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const LpRow& row = inst.rows[static_cast<size_t>(i)];
    rhs_[i] = row.rhs;
    for (auto [j, v] : row.coeffs)
      if (v != 0.0) cols_[static_cast<size_t>(j)].push_back({i, v});
  }
  lb_.resize(n_ + m_);
  ub_.resize(n_ + m_);
  lb_.head(n_) = inst.lb;
  ub_.head(n_) = inst.ub;
  for (int i = 0; i < m_; ++i) {
    switch (inst.rows[static_cast<size_t>(i)].sense) {
      case Sense::LE: lb_[n_ + i] = 0.0; ub_[n_ + i] = kInf; break;
      case Sense::GE: lb_[n_ + i] = -kInf; ub_[n_ + i] = 0.0; break;
      case Sense::EQ: lb_[n_ + i] = 0.0; ub_[n_ + i] = 0.0; break;
    }
  }
  cost_ = VectorXd::Zero(n_ + m_);
  cost_.head(n_) = inst.obj;
  status_.assign(static_cast<size_t>(n_ + m_), VarStatus::AtLower);
  basic_.resize(static_cast<size_t>(m_));
}

void LpSolver::set_objective(const VectorXd& obj) { cost_.head(n_) = obj; }

void LpSolver::set_bounds(int col, double lo, double hi) {
  lb_[col] = lo;
  ub_[col] = hi;
}

double LpSolver::column_dot(int col, const VectorXd& y) const {
  if (col >= n_) return y[col - n_];  // slack: unit column
  double s = 0.0;
  for (auto [i, v] : cols_[static_cast<size_t>(col)]) s += y[i] * v;
  return s;
}

VectorXd LpSolver::ftran(int col) const {
  if (col >= n_) return binv_.col(col - n_);
  VectorXd w = VectorXd::Zero(m_);
  for (auto [i, v] : cols_[static_cast<size_t>(col)]) w += v * binv_.col(i);
  return w;
}

void LpSolver::refactorize() {
  MatrixXd b = MatrixXd::Zero(m_, m_);
  for (int r = 0; r < m_; ++r) {
    int col = basic_[static_cast<size_t>(r)];
    if (col >= n_)
      b(col - n_, r) = 1.0;
    else
      for (auto [i, v] : cols_[static_cast<size_t>(col)]) b(i, r) = v;
  }
  binv_ = b.partialPivLu().inverse();
  pivots_since_factor_ = 0;
}

void LpSolver::compute_basic_values() {
  VectorXd resid = rhs_;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[static_cast<size_t>(j)] == VarStatus::Basic) continue;
    double v = status_[static_cast<size_t>(j)] == VarStatus::AtUpper ? ub_[j] : lb_[j];
    if (!std::isfinite(v)) v = std::isfinite(lb_[j]) ? lb_[j] : (std::isfinite(ub_[j]) ? ub_[j] : 0.0);
    if (v == 0.0) continue;
    if (j >= n_)
      resid[j - n_] -= v;
    else
      for (auto [i, c] : cols_[static_cast<size_t>(j)]) resid[i] -= c * v;
  }
  xb_ = binv_ * resid;
}

double LpSolver::infeasibility() const {
  double s = 0.0;
  for (int r = 0; r < m_; ++r) {
    int col = basic_[static_cast<size_t>(r)];
    if (xb_[r] < lb_[col]) s += lb_[col] - xb_[r];
    if (xb_[r] > ub_[col]) s += xb_[r] - ub_[col];
  }
  return s;
}

int LpSolver::price(const VectorXd& y, const VectorXd& cost, bool bland) const {
  int best = -1;
  double best_score = kCostTol;
  for (int j = 0; j < n_ + m_; ++j) {
    auto st = status_[static_cast<size_t>(j)];
    if (st == VarStatus::Basic) continue;
    if (ub_[j] - lb_[j] <= kFeasTol && std::isfinite(lb_[j]) && std::isfinite(ub_[j]))
      continue;  // fixed
    double d = cost[j] - column_dot(j, y);
    double score = 0.0;
    if (st == VarStatus::AtLower && d < -kCostTol) score = -d;
    if (st == VarStatus::AtUpper && d > kCostTol) score = d;
    if (score > best_score) {
      best = j;
      best_score = score;
      if (bland) return j;
    }
  }
  return best;
}

// One primal pivot for the entering column. Returns false when the step is
// unbounded (cannot happen with the box structure used here, kept as a guard).
bool LpSolver::pivot(int entering, const VectorXd& cost) {
  const bool from_lower = status_[static_cast<size_t>(entering)] == VarStatus::AtLower;
  const double dir = from_lower ? 1.0 : -1.0;  // movement of the entering variable
  VectorXd w = ftran(entering);

  // Step limit from the entering variable's own opposite bound.
  double own_range = ub_[entering] - lb_[entering];
  double best_step = own_range;  // may be inf
  int leave_row = -1;
  double leave_pivot = 0.0;
  bool leave_to_upper = false;

  for (int r = 0; r < m_; ++r) {
    double rate = -dir * w[r];  // d x_B[r] / d step
    if (std::abs(rate) <= kPivotTol) continue;
    int col = basic_[static_cast<size_t>(r)];
    double v = xb_[r];
    const double lo = lb_[col], hi = ub_[col];
    double target;
    if (rate > 0) {
      if (v < lo - kFeasTol) {
        target = lo;  // infeasible-low basic reaches feasibility: slope breakpoint
      } else if (v > hi + kFeasTol) {
        continue;  // rising further above its upper bound: no breakpoint
      } else {
        if (!std::isfinite(hi)) continue;
        target = hi;
      }
    } else {
      if (v > hi + kFeasTol) {
        target = hi;
      } else if (v < lo - kFeasTol) {
        continue;
      } else {
        if (!std::isfinite(lo)) continue;
        target = lo;
      }
    }
    double step = (target - v) / rate;
    bool to_upper = target == hi;
    if (step < -kFeasTol) step = 0.0;
    if (step < best_step - 1e-12 ||
        (step < best_step + 1e-12 && leave_row >= 0 && std::abs(w[r]) > std::abs(leave_pivot))) {
      best_step = std::max(step, 0.0);
      leave_row = r;
      leave_pivot = w[r];
      leave_to_upper = to_upper;
    }
  }

  if (!std::isfinite(best_step)) return false;  // unbounded direction
  degenerate_streak_ = best_step <= kFeasTol ? degenerate_streak_ + 1 : 0;

  if (leave_row < 0) {
    // Bound-to-bound flip of the entering variable.
    xb_ -= (dir * best_step) * w;
    status_[static_cast<size_t>(entering)] = from_lower ? VarStatus::AtUpper : VarStatus::AtLower;
    return true;
  }

  // Basis change.
  int leaving = basic_[static_cast<size_t>(leave_row)];
  double enter_value =
      (from_lower ? lb_[entering] : ub_[entering]) + dir * best_step;
  xb_ -= (dir * best_step) * w;
  basic_[static_cast<size_t>(leave_row)] = entering;
  status_[static_cast<size_t>(entering)] = VarStatus::Basic;
  status_[static_cast<size_t>(leaving)] = leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
  xb_[leave_row] = enter_value;

  // binv update: row elimination against the pivot row.
  VectorXd pivot_row = binv_.row(leave_row);
  double piv = w[leave_row];
  for (int r = 0; r < m_; ++r) {
    if (r == leave_row) continue;
    double f = w[r] / piv;
    if (f != 0.0) binv_.row(r) -= f * pivot_row.transpose();
  }
  binv_.row(leave_row) = pivot_row.transpose() / piv;

  if (++pivots_since_factor_ >= kRefactorEvery) {
    refactorize();
    compute_basic_values();
  }
  (void)cost;
  return true;
}

bool LpSolver::phase1() {
  const int iter_cap = 80 * (m_ + n_) + 2000;
  VectorXd c1 = VectorXd::Zero(n_ + m_);
  for (int iter = 0; iter < iter_cap; ++iter) {
    VectorXd cb(m_);
    bool infeasible_any = false;
    for (int r = 0; r < m_; ++r) {
      int col = basic_[static_cast<size_t>(r)];
      if (xb_[r] < lb_[col] - kFeasTol) {
        cb[r] = -1.0;
        infeasible_any = true;
      } else if (xb_[r] > ub_[col] + kFeasTol) {
        cb[r] = 1.0;
        infeasible_any = true;
      } else {
        cb[r] = 0.0;
      }
    }
    if (!infeasible_any) return true;
    VectorXd y = binv_.transpose() * cb;
    // Phase-1 costs are zero for nonbasic columns.
    int entering = price(y, c1, degenerate_streak_ > kBlandTrigger);
    if (entering < 0) return false;  // infeasible
    if (!pivot(entering, c1)) return false;
  }
  return infeasibility() <= kFeasTol;
}

bool LpSolver::phase2() {
  const int iter_cap = 80 * (m_ + n_) + 2000;
  for (int iter = 0; iter < iter_cap; ++iter) {
    VectorXd cb(m_);
    for (int r = 0; r < m_; ++r) cb[r] = cost_[basic_[static_cast<size_t>(r)]];
    VectorXd y = binv_.transpose() * cb;
    int entering = price(y, cost_, degenerate_streak_ > kBlandTrigger);
    if (entering < 0) return true;  // optimal
    if (!pivot(entering, cost_)) return false;  // unbounded guard (box keeps it finite)
  }
  return false;  // iteration limit
}

LpResult LpSolver::solve() {
  if (!basis_valid_) {
    for (int j = 0; j < n_; ++j)
      status_[static_cast<size_t>(j)] =
          std::isfinite(lb_[j]) ? VarStatus::AtLower : VarStatus::AtUpper;
    for (int i = 0; i < m_; ++i) {
      basic_[static_cast<size_t>(i)] = n_ + i;
      status_[static_cast<size_t>(n_ + i)] = VarStatus::Basic;
    }
    binv_ = MatrixXd::Identity(m_, m_);
    pivots_since_factor_ = 0;
    basis_valid_ = true;
  } else {
    // Bounds may have moved under the warm basis: re-pin nonbasic values.
    refactorize();
  }
  degenerate_streak_ = 0;
  compute_basic_values();

  LpResult res;
  if (infeasibility() > kFeasTol) {
    if (!phase1()) {
      if (infeasibility() > 1e-7) {
        res.status = LpStatus::Infeasible;
        return res;
      }
    }
    refactorize();
    compute_basic_values();
    if (infeasibility() > 1e-7) {
      res.status = LpStatus::Infeasible;
      return res;
    }
  }
  if (!phase2()) {
    res.status = LpStatus::IterLimit;
    return res;
  }
  refactorize();
  compute_basic_values();

  res.status = LpStatus::Optimal;
  res.x = VectorXd::Zero(n_);
  for (int j = 0; j < n_; ++j)
    if (status_[static_cast<size_t>(j)] != VarStatus::Basic)
      res.x[j] = status_[static_cast<size_t>(j)] == VarStatus::AtUpper ? ub_[j] : lb_[j];
  for (int r = 0; r < m_; ++r) {
    int col = basic_[static_cast<size_t>(r)];
    if (col < n_) res.x[col] = xb_[r];
  }
  res.obj = cost_.head(n_).dot(res.x);
  return res;
}

}  // namespace iotu
