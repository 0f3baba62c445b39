// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iotu/formulation.hpp"

namespace iotu {

/// Nonzero grid levels: geometric between the power floor and the budget.
/// Zero power is represented by the indicator being off.
std::vector<double> power_grid(double cap, int levels);

/// Independent binary decision variables of an instance (subchannel-use
/// indicators; association and scheduling indicators are derived from them).
int64_t oracle_variable_count(const SystemConfig& cfg);

struct BruteForceResult {
  double best_utility = 0.0;
  double best_weighted = 0.0;   // weighted scheduled count of the argmin
  double best_power = 0.0;      // gridded transmit power of the argmin
  Allocation argmin;
};

/// Exhaustive enumeration of the single-stage problem on a tiny instance:
/// every schedule/association pattern, every subchannel subset, every grid
/// power combination that passes the constraint system. Throws when the
/// instance exceeds the size guard (24 independent binaries, 5 grid levels).
BruteForceResult brute_force_p3(const ChannelRealization& ch, const SystemConfig& cfg,
                                const Topology& topo, const FairnessWeights& weights,
                                int power_levels);

struct Theorem1Result {
  bool equivalent = false;
  double p3_weighted = 0.0;
  double p3_power = 0.0;
  double p12_weighted = 0.0;  // max-schedule route
  double p12_power = 0.0;     // min power within the max-schedule set
};

/// Compares the single-stage brute force against the sequential route:
/// maximize the weighted scheduled count first, then minimize power within
/// that optimal set, on the same grid.
Theorem1Result verify_theorem1(const ChannelRealization& ch, const SystemConfig& cfg,
                               const Topology& topo, const FairnessWeights& weights,
                               int power_levels);

}  // namespace iotu
