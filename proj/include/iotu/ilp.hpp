// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "iotu/lp.hpp"

namespace iotu {

/// Binary integer program: min obj' x + offset subject to linear rows,
/// x in {0,1}^n. Row indices refer to named decision variables so instances
/// can be dumped for external cross-checking.
struct IlpInstance {
  int ncols = 0;
  VectorXd obj;
  double obj_offset = 0.0;
  std::vector<LpRow> rows;
  std::vector<std::string> var_names;
  /// Branching preference per column (higher first); ties fall back to the
  /// most fractional value. Empty means pure most-fractional.
  std::vector<int> branch_priority;

  void dump(std::ostream& os) const;
};

struct IlpResult {
  enum class Status { Optimal, NodeLimit, Infeasible };
  Status status = Status::Infeasible;
  std::vector<uint8_t> x;
  double obj = 0.0;  // includes obj_offset
  int64_t nodes = 0;
  bool proven_optimal = false;
};

/// Exact best-first branch and bound over the LP relaxation: binaries relax
/// to [0,1], branching on the most fractional variable, node limit as a
/// safety valve. The solver object is reusable: objective coefficients can
/// be swapped between solves (the constraint set stays), and a warm
/// incumbent primes pruning.
class IlpSolver {
 public:
  explicit IlpSolver(IlpInstance inst, int64_t node_limit = 100000);

  void set_objective(const VectorXd& obj, double offset);
  const IlpInstance& instance() const { return inst_; }

  IlpResult solve(const std::vector<uint8_t>* warm_incumbent = nullptr);

 private:
  bool rows_feasible(const std::vector<uint8_t>& x) const;
  double point_objective(const std::vector<uint8_t>& x) const;

  IlpInstance inst_;
  std::unique_ptr<LpSolver> lp_;
  int64_t node_limit_;
};

}  // namespace iotu
