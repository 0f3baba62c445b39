// SPDX-License-Identifier: Apache-2.0
#include "iotu/ilp.hpp"

#include <cmath>
#include <ostream>
#include <queue>

namespace iotu {

namespace {
constexpr double kIntTol = 1e-7;
constexpr double kPruneTol = 1e-9;
constexpr double kRowTol = 1e-7;

struct Node {
  double bound;
  int64_t seq;  // deterministic tie-break
  std::vector<std::pair<int, uint8_t>> fixes;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.seq > b.seq;
  }
};

}  // namespace

void IlpInstance::dump(std::ostream& os) const {
  os << "minimize";
  for (int j = 0; j < ncols; ++j)
    if (obj[j] != 0.0) os << ' ' << (obj[j] >= 0 ? "+" : "") << obj[j] << ' '
                          << (j < static_cast<int>(var_names.size()) ? var_names[static_cast<size_t>(j)]
                                                                     : "x" + std::to_string(j));
  if (obj_offset != 0.0) os << " + " << obj_offset;
  os << '\n';
  for (const LpRow& row : rows) {
    bool first = true;
    for (auto [j, v] : row.coeffs) {
      os << (first ? "" : " ") << (v >= 0 && !first ? "+" : "") << v << ' '
         << (j < static_cast<int>(var_names.size()) ? var_names[static_cast<size_t>(j)]
                                                    : "x" + std::to_string(j));
      first = false;
    }
    os << (row.sense == Sense::LE ? " <= " : row.sense == Sense::GE ? " >= " : " = ") << row.rhs
       << '\n';
  }
  os << "binaries " << ncols << '\n';
}

IlpSolver::IlpSolver(IlpInstance inst, int64_t node_limit)
    : inst_(std::move(inst)), node_limit_(node_limit) {
  LpInstance lp;
  lp.ncols = inst_.ncols;
  lp.obj = inst_.obj;
  lp.rows = inst_.rows;
  lp.lb = VectorXd::Zero(inst_.ncols);
  lp.ub = VectorXd::Ones(inst_.ncols);
  lp_ = std::make_unique<LpSolver>(lp);
}

void IlpSolver::set_objective(const VectorXd& obj, double offset) {
  inst_.obj = obj;
  inst_.obj_offset = offset;
  lp_->set_objective(obj);
}

bool IlpSolver::rows_feasible(const std::vector<uint8_t>& x) const {
  for (const LpRow& row : inst_.rows) {
    double s = 0.0;
    for (auto [j, v] : row.coeffs) s += v * (x[static_cast<size_t>(j)] ? 1.0 : 0.0);
    switch (row.sense) {
      case Sense::LE:
        if (s > row.rhs + kRowTol) return false;
        break;
      case Sense::GE:
        if (s < row.rhs - kRowTol) return false;
        break;
      case Sense::EQ:
        if (std::abs(s - row.rhs) > kRowTol) return false;
        break;
    }
  }
  return true;
}

double IlpSolver::point_objective(const std::vector<uint8_t>& x) const {
  double s = inst_.obj_offset;
  for (int j = 0; j < inst_.ncols; ++j)
    if (x[static_cast<size_t>(j)]) s += inst_.obj[j];
  return s;
}

IlpResult IlpSolver::solve(const std::vector<uint8_t>* warm_incumbent) {
  IlpResult res;
  res.status = IlpResult::Status::Infeasible;

  bool have_incumbent = false;
  std::vector<uint8_t> best_x;
  double best_obj = std::numeric_limits<double>::infinity();
  if (warm_incumbent && static_cast<int>(warm_incumbent->size()) == inst_.ncols &&
      rows_feasible(*warm_incumbent)) {
    best_x = *warm_incumbent;
    best_obj = point_objective(best_x);
    have_incumbent = true;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  int64_t seq = 0;
  int64_t nodes = 0;
  bool exhausted = true;
  const bool has_prio = static_cast<int>(inst_.branch_priority.size()) == inst_.ncols;

  auto pick_branch = [&](const VectorXd& x) {
    int var = -1;
    double most_frac = kIntTol;
    int best_prio = std::numeric_limits<int>::min();
    for (int j = 0; j < inst_.ncols; ++j) {
      double frac = std::abs(x[j] - std::round(x[j]));
      if (frac <= kIntTol) continue;
      int prio = has_prio ? inst_.branch_priority[static_cast<size_t>(j)] : 0;
      if (prio > best_prio || (prio == best_prio && frac > most_frac)) {
        best_prio = prio;
        most_frac = frac;
        var = j;
      }
    }
    return var;
  };

  // Diving pass: follow LP roundings depth-first to reach an incumbent
  // quickly. Unexplored siblings seed the best-first queue; an unresolved
  // dive leaf re-enters the queue so no subtree is lost.
  {
    std::vector<std::pair<int, uint8_t>> fixes;
    while (true) {
      if (nodes >= node_limit_) {
        open.push({-std::numeric_limits<double>::infinity(), seq++, fixes});
        break;
      }
      ++nodes;
      for (int j = 0; j < inst_.ncols; ++j) lp_->set_bounds(j, 0.0, 1.0);
      for (auto [j, v] : fixes) lp_->set_bounds(j, v, v);
      LpResult lp = lp_->solve();
      if (lp.status == LpStatus::Infeasible) break;
      if (lp.status == LpStatus::IterLimit) {
        open.push({-std::numeric_limits<double>::infinity(), seq++, fixes});
        break;
      }
      double bound = lp.obj + inst_.obj_offset;
      if (have_incumbent && bound >= best_obj - kPruneTol) break;
      int var = pick_branch(lp.x);
      if (var < 0) {
        std::vector<uint8_t> x(static_cast<size_t>(inst_.ncols));
        for (int j = 0; j < inst_.ncols; ++j) x[static_cast<size_t>(j)] = lp.x[j] > 0.5 ? 1 : 0;
        if (rows_feasible(x)) {
          double obj = point_objective(x);
          if (!have_incumbent || obj < best_obj) {
            best_obj = obj;
            best_x = std::move(x);
            have_incumbent = true;
          }
        } else {
          open.push({bound, seq++, fixes});  // borderline LP: leave to the main loop
        }
        break;
      }
      uint8_t v = lp.x[var] > 0.5 ? 1 : 0;
      Node sibling{bound, seq++, fixes};
      sibling.fixes.push_back({var, static_cast<uint8_t>(1 - v)});
      open.push(std::move(sibling));
      fixes.push_back({var, v});
    }
  }

  while (!open.empty()) {
    if (nodes >= node_limit_) {
      exhausted = false;
      break;
    }
    Node node = open.top();
    open.pop();
    if (have_incumbent && node.bound >= best_obj - kPruneTol) continue;
    ++nodes;

    for (int j = 0; j < inst_.ncols; ++j) lp_->set_bounds(j, 0.0, 1.0);
    for (auto [j, v] : node.fixes) lp_->set_bounds(j, v, v);

    LpResult lp = lp_->solve();
    if (lp.status == LpStatus::Infeasible) continue;
    double bound = lp.obj + inst_.obj_offset;
    if (lp.status == LpStatus::Optimal && have_incumbent && bound >= best_obj - kPruneTol) continue;

    // Most fractional variable within the highest fractional priority class.
    int branch_var = -1;
    double most_frac = kIntTol;
    int best_prio = std::numeric_limits<int>::min();
    const bool has_prio = static_cast<int>(inst_.branch_priority.size()) == inst_.ncols;
    if (lp.status == LpStatus::Optimal) {
      for (int j = 0; j < inst_.ncols; ++j) {
        double frac = std::abs(lp.x[j] - std::round(lp.x[j]));
        if (frac <= kIntTol) continue;
        int prio = has_prio ? inst_.branch_priority[static_cast<size_t>(j)] : 0;
        if (prio > best_prio || (prio == best_prio && frac > most_frac)) {
          best_prio = prio;
          most_frac = frac;
          branch_var = j;
        }
      }
    } else {
      // LP iteration trouble: branch on the first unfixed variable, bound unknown.
      bound = -std::numeric_limits<double>::infinity();
      std::vector<uint8_t> fixed(static_cast<size_t>(inst_.ncols), 0);
      for (auto [j, v] : node.fixes) fixed[static_cast<size_t>(j)] = 1;
      for (int j = 0; j < inst_.ncols && branch_var < 0; ++j)
        if (!fixed[static_cast<size_t>(j)]) branch_var = j;
      if (branch_var < 0) continue;  // fully fixed yet unsolvable: treat as pruned
    }

    if (branch_var < 0) {
      // Integral relaxation: round, re-verify, and take as incumbent.
      std::vector<uint8_t> x(static_cast<size_t>(inst_.ncols));
      for (int j = 0; j < inst_.ncols; ++j) x[static_cast<size_t>(j)] = lp.x[j] > 0.5 ? 1 : 0;
      if (rows_feasible(x)) {
        double obj = point_objective(x);
        if (!have_incumbent || obj < best_obj) {
          best_obj = obj;
          best_x = std::move(x);
          have_incumbent = true;
        }
        continue;
      }
      // Rounded point failed exact row checks (borderline LP): branch instead.
      for (int j = 0; j < inst_.ncols && branch_var < 0; ++j) {
        double frac = std::abs(lp.x[j] - std::round(lp.x[j]));
        if (frac > 1e-12) branch_var = j;
      }
      if (branch_var < 0) continue;
    }

    for (uint8_t v : {uint8_t{1}, uint8_t{0}}) {
      Node child{bound, seq++, node.fixes};
      child.fixes.push_back({branch_var, v});
      open.push(std::move(child));
    }
  }

  if (!have_incumbent) {
    res.status = exhausted ? IlpResult::Status::Infeasible : IlpResult::Status::NodeLimit;
    res.nodes = nodes;
    return res;
  }
  res.status = exhausted ? IlpResult::Status::Optimal : IlpResult::Status::NodeLimit;
  res.x = std::move(best_x);
  res.obj = best_obj;
  res.nodes = nodes;
  res.proven_optimal = exhausted;
  return res;
}

}  // namespace iotu
