// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>

#include "iotu/formulation.hpp"
#include "iotu/ilp.hpp"

namespace iotu {

/// Working power matrix used while association is being decided: it carries
/// a candidate transmit power for every possible link, not only the active
/// ones. Scheduled links inherit optimized powers between outer iterations;
/// everything else stays at the equal split.
struct PowerMatrix {
  Tensor3<double> cu;     // [n][k][t]
  Tensor4<double> iot;    // [m][a][k][t], licensed
  Tensor4<double> iot_u;  // [m][q][ku][t]

  static PowerMatrix equal_split(const SystemConfig& cfg);
};

/// Variable keys used by the rate linearization (stable across the ILP
/// column maps). Layout: kind | m | a | k.
enum class VarKind : int { Phi = 0, Theta = 1, Beta = 2, F = 3, C = 4 };

inline int64_t var_key(VarKind kind, int m, int a, int k) {
  return (static_cast<int64_t>(kind) << 40) | (static_cast<int64_t>(m + 1) << 24) |
         (static_cast<int64_t>(a + 1) << 12) | static_cast<int64_t>(k + 1);
}

/// One linearized rate: own-indicator coefficient plus first-order difference
/// coefficients for every interfering indicator, expanded around a binary
/// reference point. Coefficients are exact 0/1 function-value differences.
struct RateExpr {
  int64_t own_key = 0;
  double own_coef = 0.0;
  std::vector<std::pair<int64_t, double>> cross;
  double constant = 0.0;

  double eval(const std::function<double(int64_t)>& value) const {
    double s = constant + own_coef * value(own_key);
    for (auto& [key, coef] : cross) s += coef * value(key);
    return s;
  }
  /// Largest/smallest attainable value over the binary box.
  double box_max() const {
    double s = constant + std::max(0.0, own_coef);
    for (auto& [key, coef] : cross) s += std::max(0.0, coef);
    return s;
  }
  double box_max_own_zero() const {
    double s = constant;
    for (auto& [key, coef] : cross) s += std::max(0.0, coef);
    return s;
  }
  double box_min() const {
    double s = constant + std::min(0.0, own_coef);
    for (auto& [key, coef] : cross) s += std::min(0.0, coef);
    return s;
  }
};

/// All rate expressions of one subframe.
struct LinearizedRates {
  int t = 0;
  int N = 0, M = 0, Q = 0, K = 0, Ku = 0;
  std::vector<RateExpr> cellular;  // n*K + k
  std::vector<RateExpr> direct;    // m*K + k
  std::vector<RateExpr> m2m;       // (m*Q + q)*K + k
  std::vector<RateExpr> m2m_u;     // (m*Q + q)*Ku + k (ON subframes only)

  const RateExpr& cell(int n, int k) const { return cellular[static_cast<size_t>(n) * K + k]; }
  const RateExpr& dir(int m, int k) const { return direct[static_cast<size_t>(m) * K + k]; }
  const RateExpr& agg(int m, int q, int k) const {
    return m2m[(static_cast<size_t>(m) * Q + q) * K + k];
  }
  const RateExpr& agg_u(int m, int q, int k) const {
    return m2m_u[(static_cast<size_t>(m) * Q + q) * Ku + k];
  }
};

/// First-order expansion of every rate around the reference allocation with
/// powers held fixed. Exact at the reference point and for any single flip
/// of one expanded indicator.
LinearizedRates linearize_rates(const ChannelRealization& ch, const PowerMatrix& power,
                                const Allocation& reference, const SystemConfig& cfg,
                                const Topology& topo, int t);

/// The two linear rows tying an OR indicator to its group (both directions
/// of the product constraint). Exhaustively equivalent to the product form.
bool or_coupling_rows_hold(const std::vector<int>& group, int or_value);
bool or_coupling_product_holds(const std::vector<int>& group, int or_value);

struct SchedOptions {
  bool allow_m2m = true;
  bool allow_unlicensed = true;
  int64_t node_limit = 100000;
  int max_dual_iters = 200;
  double delta_tol = 1e-3;
  int patience = 6;  // dual iterations without incumbent improvement
  std::ostream* dump_ilp = nullptr;
};

/// Integer program of one subframe: variable maps, presolve, rows, and the
/// delta-dependent objective.
class Sp3Model {
 public:
  Sp3Model(const ChannelRealization& ch, const PowerMatrix& power, const SystemConfig& cfg,
           const Topology& topo, const Allocation& reference, const FairnessWeights& weights,
           int t, const SchedOptions& opts);

  /// Active-CU rate floor unattainable even with every subchannel: the
  /// subframe cannot be populated and falls back to the all-zero slice.
  bool qos_impossible() const { return qos_impossible_; }

  const IlpInstance& instance() const { return inst_; }

  VectorXd objective(const VectorXd& delta, double* offset) const;

  /// Writes a solved assignment into subframe t of the allocation, powers
  /// gated from the working matrix. Idle-CU uplinks with no relayed devices
  /// are switched off.
  void apply(const std::vector<uint8_t>& x, const PowerMatrix& power, Allocation& al) const;

  int var_phi(int n, int k) const { return phi_id_[static_cast<size_t>(n) * K_ + k]; }
  int var_theta(int m, int a, int k) const {
    return theta_id_[(static_cast<size_t>(m) * (Q_ + 1) + a) * K_ + k];
  }
  int var_beta(int m, int q, int k) const {
    return Ku_ ? beta_id_[(static_cast<size_t>(m) * Q_ + q) * Ku_ + k] : -1;
  }
  int var_f(int m, int a) const { return f_id_[static_cast<size_t>(m) * (Q_ + 1) + a]; }
  int var_c(int m) const { return c_id_[static_cast<size_t>(m)]; }
  int t() const { return t_; }

  const LinearizedRates& rates() const { return rates_; }

 private:
  void build(const Topology& topo, const Allocation& reference, const SchedOptions& opts);

  const SystemConfig& cfg_;
  const FairnessWeights& weights_;
  int t_;
  int N_, M_, Q_, K_, Ku_;
  bool on_ = false;
  bool qos_impossible_ = false;
  std::vector<int> idle_ids_;
  LinearizedRates rates_;
  IlpInstance inst_;
  std::vector<int> phi_id_, theta_id_, beta_id_, f_id_, c_id_;
};

struct Sp3Result {
  std::vector<uint8_t> x;
  double objective = 0.0;
  bool proven_optimal = true;
  bool all_zero = false;  // QoS fallback or infeasible program
};

/// Exact branch-and-bound solve of one subframe's linearized program for a
/// given multiplier vector.
Sp3Result solve_sp3(Sp3Model& model, IlpSolver& solver, const VectorXd& delta,
                    const std::vector<uint8_t>* warm);

/// Projected subgradient step for the once-per-cycle multiplier.
VectorXd update_delta(const VectorXd& delta, const Allocation& al, const SystemConfig& cfg);

struct AssocSchedOutcome {
  Allocation alloc;
  int dual_iterations = 0;
  bool converged = false;  // multiplier movement fell below tolerance
  VectorXd delta;
};

/// Lagrangian relaxation of the once-per-cycle constraint: per-subframe
/// integer programs under a shared multiplier vector, subgradient updates,
/// and an earliest-subframe repair pass that restores primal feasibility.
AssocSchedOutcome solve_association_scheduling(const ChannelRealization& ch,
                                               const PowerMatrix& power, const SystemConfig& cfg,
                                               const Topology& topo, const Allocation& reference,
                                               const FairnessWeights& weights,
                                               const SchedOptions& opts);

}  // namespace iotu
