// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "iotu/allocation.hpp"
#include "iotu/scenario.hpp"

namespace iotu {

/// SINR of the cellular link CU n -> BS on licensed subchannel k, subframe t.
/// Interference: aggregation-mode M2M links sharing k, except those relayed
/// by CU n itself (their transmitters are heard at the BS).
double sinr_cellular(const Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                     const Topology& topo, int n, int k, int t);

/// SINR of the direct link IoT m -> BS. Interference: all aggregation-mode
/// M2M links of other devices sharing k.
double sinr_iot_direct(const Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                       int m, int k, int t);

/// SINR of the licensed M2M link IoT m -> idle slot q. Interference:
/// co-channel cellular links of other CUs plus other devices' licensed links
/// toward different receivers.
double sinr_m2m_licensed(const Allocation& al, const ChannelRealization& ch,
                         const SystemConfig& cfg, const Topology& topo, int m, int q, int k,
                         int t);

/// SINR of the unlicensed M2M link IoT m -> idle slot q. Interference:
/// other devices' unlicensed links toward different receivers plus the
/// aggregate Wi-Fi term. Throws outside the ON window.
double sinr_m2m_unlicensed(const Allocation& al, const ChannelRealization& ch,
                           const SystemConfig& cfg, int m, int q, int k, int t);

/// Spectral efficiency of one subchannel, log2(1 + sinr).
inline double rate(double sinr) { return log2p1(sinr); }

/// Per-subframe rate aggregates used by the feasibility checker and the
/// outer loop. All entries are zero where the matching indicator is zero.
struct SubframeRates {
  MatrixXd cellular;       // [n][k]
  MatrixXd direct;         // [m][k]
  Tensor3<double> m2m;     // [m][q][k]
  Tensor3<double> m2m_u;   // [m][q][ku]

  double cellular_sum(int n) const { return cellular.row(n).sum(); }
  double direct_sum(int m) const { return direct.row(m).sum(); }
};

SubframeRates compute_rates(const Allocation& al, const ChannelRealization& ch,
                            const SystemConfig& cfg, const Topology& topo, int t);

}  // namespace iotu
