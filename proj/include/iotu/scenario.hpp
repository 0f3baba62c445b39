// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <vector>

#include "iotu/config.hpp"
#include "iotu/types.hpp"

namespace iotu {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// Node layout for one cycle. The base station sits at the origin; every
/// other node is drawn uniformly on the disk of radius cell_radius.
struct Topology {
  Point bs_position;
  std::vector<Point> cu_positions;    // N
  std::vector<int> idle_cu_ids;       // Q distinct CU indices, sorted
  std::vector<Point> iot_positions;   // M
  std::vector<Point> wifi_positions;  // F

  bool is_idle_cu(int n) const;
  /// Position of idle CU by idle slot q in [0, Q).
  const Point& idle_cu(int q) const { return cu_positions[static_cast<size_t>(idle_cu_ids[q])]; }
};

/// Per-link, per-subchannel, per-subframe linear power gains for every
/// directed link class, plus the aggregate Wi-Fi interference seen at each
/// idle CU on each unlicensed subchannel. Receiver dimension of the *_cu
/// tensors is the idle slot q (idle_cu_ids order).
struct ChannelRealization {
  Tensor3<double> cu_bs;        // [n][k][t], licensed
  Tensor3<double> iot_bs;       // [m][k][t], licensed
  Tensor4<double> cu_cu;        // [n'][q][k][t], licensed
  Tensor4<double> iot_cu;       // [m][q][k][t], licensed
  Tensor4<double> iot_cu_u;     // [m][q][ku][t], unlicensed
  Tensor4<double> wifi_cu_u;    // [f][q][ku][t], unlicensed
  Tensor3<double> wifi_interference;  // [q][ku][t], watts
};

/// Deterministic path-loss part of the channel gain, G * d^-alpha.
/// This is also the test hook with the fading factor pinned to one.
double path_gain(double dist, const SystemConfig& cfg);

/// Full gain G * d^-alpha * |h0|^2 with |h0|^2 ~ unit-mean exponential.
/// Throws on dist == 0 ("degenerate colocated nodes").
double channel_gain(double dist, const SystemConfig& cfg, Rng& rng);

/// Uniform-disk node placement; idle CU ids drawn without replacement.
/// Colocated node pairs are resampled away.
Topology generate_topology(const SystemConfig& cfg, Rng& rng);

/// Aggregate Wi-Fi interference I[q][ku][t] = sum_f (P_w / K_u) * gain.
/// Throws when K_u == 0.
Tensor3<double> wifi_interference(const SystemConfig& cfg, const Tensor4<double>& wifi_gains);

/// Draws block fading independently per subchannel and subframe for every
/// link class and fills in the Wi-Fi aggregate.
ChannelRealization generate_channels(const Topology& topo, const SystemConfig& cfg, Rng& rng);

/// CSV dump: node_id, kind, x, y.
void dump_topology_csv(const Topology& topo, std::ostream& os);

}  // namespace iotu
