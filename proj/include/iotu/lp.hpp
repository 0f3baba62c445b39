// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>
#include <vector>

#include "iotu/types.hpp"

namespace iotu {

enum class Sense { LE, GE, EQ };

struct LpRow {
  std::vector<std::pair<int, double>> coeffs;  // (column, value)
  Sense sense = Sense::LE;
  double rhs = 0.0;
};

/// min obj' x  s.t.  rows, lb <= x <= ub.
struct LpInstance {
  int ncols = 0;
  VectorXd obj;
  std::vector<LpRow> rows;
  VectorXd lb, ub;
};

enum class LpStatus { Optimal, Infeasible, IterLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  double obj = 0.0;
  VectorXd x;  // structural columns only
};

/// Bounded-variable revised primal simplex with a dense basis inverse,
/// composite phase 1, and periodic refactorization. The solver keeps its
/// basis between calls, so re-solving after objective or bound changes is
/// cheap; branch-and-bound leans on that.
class LpSolver {
 public:
  explicit LpSolver(const LpInstance& inst);

  void set_objective(const VectorXd& obj);
  void set_bounds(int col, double lo, double hi);
  double lower_bound(int col) const { return lb_[col]; }
  double upper_bound(int col) const { return ub_[col]; }

  LpResult solve();

  int num_rows() const { return m_; }
  int num_structural() const { return n_; }

 private:
  enum class VarStatus : uint8_t { AtLower, AtUpper, Basic };

  void refactorize();
  void compute_basic_values();
  VectorXd ftran(int col) const;          // B^-1 * A_col
  double column_dot(int col, const VectorXd& y) const;
  int price(const VectorXd& y, const VectorXd& cost, bool bland) const;
  bool pivot(int entering, const VectorXd& cost);
  bool phase1();
  bool phase2();
  double infeasibility() const;

  int n_ = 0;  // structural columns
  int m_ = 0;  // rows (slack columns appended after structurals)
  std::vector<std::vector<std::pair<int, double>>> cols_;  // structural columns
  VectorXd rhs_;
  VectorXd lb_, ub_;      // size n_ + m_
  VectorXd cost_;         // size n_ + m_ (slack costs zero)
  std::vector<VarStatus> status_;
  std::vector<int> basic_;   // basic column per row
  MatrixXd binv_;
  VectorXd xb_;              // basic variable values
  int pivots_since_factor_ = 0;
  int degenerate_streak_ = 0;
  bool basis_valid_ = false;
};

}  // namespace iotu
