// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

#include "iotu/assoc_sched.hpp"
#include "iotu/power_alloc.hpp"

namespace iotu {

enum class Scheme { Tc, Iotl, Daspa, Maspa, Iaspa };

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);

struct TraceRow {
  int iteration = 0;
  double objective = 0.0;
  double scheduled_weighted = 0.0;
  double total_power_w = 0.0;
  bool feasible = false;
  double wallclock_ms = 0.0;
};

struct Sp5TraceRow {
  int outer_iteration = 0;
  int subframe = 0;
  int sca_rounds = 0;
  int inner_iterations = 0;
  int fallback_count = 0;
  double objective = 0.0;
  double max_mult_move = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::vector<Sp5TraceRow> sp5_rows;
  int iterations = 0;
  bool converged = false;
  bool hit_iteration_cap = false;
  int cu_outages = 0;
  int dropped_devices = 0;
  bool reinterpreted = false;  // set by the matching-based baseline
  double wallclock_ms = 0.0;
};

struct SchemeResult {
  Allocation alloc;
  RunTrace trace;
};

/// Alternating association/scheduling and power minimization until the
/// objective movement falls below the configured threshold. A candidate that
/// fails to improve the accepted objective ends the loop, which keeps the
/// recorded objective sequence nonincreasing.
SchemeResult run_iaspa(const Topology& topo, const ChannelRealization& ch,
                       const SystemConfig& cfg, const FairnessWeights& weights);

/// Cellular-only baseline: no relaying, no unlicensed access.
SchemeResult run_tc(const Topology& topo, const ChannelRealization& ch, const SystemConfig& cfg,
                    const FairnessWeights& weights);

/// Cluster baseline on licensed spectrum only.
SchemeResult run_iotl(const Topology& topo, const ChannelRealization& ch, const SystemConfig& cfg,
                      const FairnessWeights& weights);

/// Decoupled baseline: one scheduling pass at the equal power split, one
/// power-minimization pass, no alternation.
SchemeResult run_daspa(const Topology& topo, const ChannelRealization& ch,
                       const SystemConfig& cfg, const FairnessWeights& weights);

/// Matching-based baseline, reinterpreted as greedy deferred acceptance over
/// gain-ranked preference lists followed by power minimization.
SchemeResult run_maspa(const Topology& topo, const ChannelRealization& ch,
                       const SystemConfig& cfg, const FairnessWeights& weights);

SchemeResult run_scheme(Scheme s, const Topology& topo, const ChannelRealization& ch,
                        const SystemConfig& cfg, const FairnessWeights& weights);

/// Device-proposing deferred acceptance between devices and receivers
/// (0 = BS with unlimited capacity, q+1 = idle slot q with capacity one),
/// preferences ranked by mean channel gain. Exposed for the matching tests.
std::vector<int> maspa_match(const Topology& topo, const ChannelRealization& ch,
                             const SystemConfig& cfg);

}  // namespace iotu
