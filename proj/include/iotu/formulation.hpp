// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iotu/link_model.hpp"

namespace iotu {

enum class ConstraintId {
  PowerBudgetIot,             // per-device budget, per subframe
  PowerBudgetCu,              // per-CU budget, per subframe
  RelaySubchannelConflict,    // idle CU uplink vs its M2M links on one k
  UnlicensedSubchannelConflict,  // one unlicensed subchannel per receiving CU
  CellularSubchannelConflict, // at most one cellular/direct link per k
  AnchorMissing,              // scheduled aggregation device lacks a licensed anchor
  ScheduleOnce,               // at most one scheduled subframe per cycle
  SingleAssociation,          // sum_a f <= c
  SchedAssocCoupling,         // 1 - c = prod_a (1 - f)
  AssocSubchannelCoupling,    // 1 - f = prod_k (1 - theta)
  RateCellularMode,           // direct rate covers traffic
  RateAggregationMode,        // M2M rate covers traffic (ON/OFF variants)
  CuCoverage,                 // CU uplink rate covers aggregated M2M rates
  CuQos,                      // active CU rate floor
  UnlicensedOffWindow,        // beta must be zero in OFF subframes
  PowerGating,                // power positive without indicator, or negative
};

const char* constraint_name(ConstraintId id);

struct Violation {
  ConstraintId id;
  int m = -1, n = -1, k = -1, t = -1;
};

using ViolationReport = std::vector<Violation>;

/// Evaluates the full constraint system at a trial point. Rate constraints
/// are checked with true rates at the stored powers; rows attached to a link
/// are vacuous while that link is switched off, so the all-zero allocation is
/// always clean. Throws on dimension mismatch (structural error, distinct
/// from infeasibility).
ViolationReport check_feasibility(const Allocation& al, const ChannelRealization& ch,
                                  const SystemConfig& cfg, const Topology& topo);

/// Single-stage objective: epsilon * total transmit power plus
/// (1 - epsilon) * sum_m lambda_m * (T - scheduled count).
double utility(const Allocation& al, const SystemConfig& cfg, const FairnessWeights& w);

/// Weighted scheduled count, sum_m lambda_m sum_t c_{m,t}.
double weighted_scheduled(const Allocation& al, const FairnessWeights& w);

int raw_scheduled(const Allocation& al);

/// Fraction of scheduled devices associated with the BS (zero when nothing
/// is scheduled).
double bs_association_share(const Allocation& al);

void violations_to_csv(const ViolationReport& report, std::ostream& os);

}  // namespace iotu
