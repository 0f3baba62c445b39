// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iotu/formulation.hpp"

namespace iotu {

constexpr double kPowerFloor = 1e-9;    // watts; stands in for zero inside log space
constexpr double kSinrRefFloor = 1e-6;  // reference SINR floor for the approximation

/// Tangent coefficients of the concave lower bound
/// d * log2(gamma) + e <= log2(1 + gamma), tight at gamma_ref.
struct ScaCoefficients {
  double d = 0.0;
  double e = 0.0;
};

/// Throws for gamma_ref <= 0 (the bound degenerates there; callers floor
/// their references first).
ScaCoefficients sca_coefficients(double gamma_ref);

/// One transmit-power variable of a subframe program (an active link on one
/// subchannel).
struct PowerVar {
  enum class Kind : uint8_t { Cu, IotLicensed, IotUnlicensed };
  Kind kind;
  int node;   // CU id or device id
  int a;      // receiver: theta slot index (0 = BS) or beta slot
  int k;      // subchannel
  double gain;       // signal path gain
  double cap;        // owner budget, used as a per-variable clip
  int budget_group;  // index into the program's budget list
};

/// One rate term: transmitter variable, interference profile at its
/// receiver, and the current tangent coefficients. Terms on the subtracted
/// side of a coverage row are evaluated with the interference log frozen at
/// the reference (first-order tangent), which keeps every emitted row convex
/// in log-power space.
struct SinrTerm {
  int var = -1;
  double base = 0.0;  // noise (+ Wi-Fi) at the receiver
  std::vector<std::pair<int, double>> interferers;  // (var, gain)
  ScaCoefficients sca;
  bool frozen = false;
  double frozen_log_den = 0.0;                   // ln(base + I(ref))
  std::vector<std::pair<int, double>> frozen_w;  // interference weights at ref
};

struct RateRow {
  enum class Type : uint8_t { DirectTraffic, AggTraffic, Coverage, Qos };
  Type type;
  int owner;           // device, idle slot, or CU id
  double target;       // d_m, 0, or R_min
  std::vector<int> lhs;  // expression ids
  std::vector<int> rhs;  // expression ids (coverage rows)
};

struct BudgetGroup {
  bool device = false;
  int node = 0;
  double cap = 0.0;
  std::vector<int> vars;
};

/// Convex program of one subframe in transformed variables p_hat = ln p:
/// minimize epsilon * sum exp(p_hat) subject to budget rows and tangent
/// rate rows. Only links whose indicators are set appear.
class Sp6Program {
 public:
  Sp6Program() = default;

  int num_vars() const { return static_cast<int>(vars_.size()); }
  const std::vector<PowerVar>& vars() const { return vars_; }
  const std::vector<RateRow>& rows() const { return rows_; }
  const std::vector<BudgetGroup>& budgets() const { return budgets_; }
  bool structurally_infeasible() const { return structurally_infeasible_; }
  const std::vector<int>& orphan_devices() const { return orphan_devices_; }

  /// Rebuilds tangent coefficients and frozen interference weights around
  /// the given reference power vector.
  void set_reference(const VectorXd& ref_power);

  double objective(const VectorXd& p, double epsilon) const;

  /// True spectral efficiency of one expression at powers p.
  double true_rate(int expr, const VectorXd& p) const;
  double true_row_surplus(const RateRow& row, const VectorXd& p) const;

  /// Tangent-approximated rate and row surplus in p space.
  double sca_rate(int expr, const VectorXd& p) const;
  double sca_row_surplus(const RateRow& row, const VectorXd& p) const;

  /// Constraint value g(p_hat) <= 0 form of a rate row for convexity probes:
  /// target - (lhs - rhs) evaluated at p = exp(p_hat).
  double row_constraint(const RateRow& row, const VectorXd& p_hat) const;

  const SinrTerm& expr(int id) const { return exprs_[static_cast<size_t>(id)]; }
  static double base_plus_interference(const SinrTerm& e, const VectorXd& p);

  friend Sp6Program build_sp6(const Allocation&, const ChannelRealization&, const SystemConfig&,
                              const Topology&, int);

 private:
  std::vector<PowerVar> vars_;
  std::vector<SinrTerm> exprs_;  // first num_vars() entries mirror the variables
  std::vector<RateRow> rows_;
  std::vector<BudgetGroup> budgets_;
  std::vector<int> orphan_devices_;
  bool structurally_infeasible_ = false;
};

Sp6Program build_sp6(const Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                     const Topology& topo, int t);

/// Lagrange multipliers of the dual decomposition, all kept nonnegative.
struct DualState {
  VectorXd mu;     // per budget group
  VectorXd nu;     // per direct-traffic row
  VectorXd kappa;  // per aggregation-traffic row
  VectorXd xi;     // per coverage row
  VectorXd chi;    // per QoS row
  int iteration = 0;

  static DualState zeros(const Sp6Program& prog);
  double max_abs_diff(const DualState& other) const;
};

struct SlaveResult {
  VectorXd p;
  int descent_steps = 0;     // nonzero when the closed forms needed the fallback
  double proj_grad = 0.0;    // projected-gradient norm at the accepted point
};

/// Closed-form stationarity evaluation (Jacobi sweeps over links) with a
/// projected-gradient descent fallback on the same Lagrangian; the returned
/// point is clipped to [power floor, budget cap].
SlaveResult solve_slave(const DualState& dual, const Sp6Program& prog, const SystemConfig& cfg,
                        const VectorXd& start);

/// Lagrangian of the dual decomposition and its gradient in p_hat space
/// (exposed for the stationarity oracle in tests).
double sp6_lagrangian(const Sp6Program& prog, const DualState& dual, const SystemConfig& cfg,
                      const VectorXd& p_hat);
VectorXd sp6_lagrangian_grad(const Sp6Program& prog, const DualState& dual,
                             const SystemConfig& cfg, const VectorXd& p_hat);

/// Projected subgradient step on every multiplier; steps shrink as 1/sqrt of
/// the iteration count beyond one hundred.
DualState update_master(const DualState& dual, const VectorXd& p, const Sp6Program& prog,
                        const SystemConfig& cfg);

struct Sp5Trace {
  int outer_rounds = 0;
  int inner_iterations = 0;
  int fallback_count = 0;
  double objective = 0.0;       // epsilon * total power of the returned point
  double max_mult_move = 0.0;   // at inner-loop exit
  double max_proj_grad = 0.0;   // worst accepted slave stationarity
};

struct Sp5Result {
  bool feasible = false;
  std::vector<int> infeasible_devices;  // candidates for unscheduling
  std::vector<int> outage_cus;          // active CUs that cannot reach the floor
  Sp5Trace trace;
};

/// Per-subframe power minimization: SCA outer loop around the dual inner
/// loop, then a true-rate restoration and tightening polish. Writes the
/// resulting powers into the allocation.
Sp5Result solve_sp5(Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                    const Topology& topo, int t);

}  // namespace iotu
