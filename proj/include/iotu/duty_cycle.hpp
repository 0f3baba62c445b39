// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "iotu/config.hpp"

namespace iotu {

/// ON/OFF structure of one scheduling cycle. ON subframes occupy the cycle
/// prefix; under block fading any permutation is equivalent.
struct CycleSchedule {
  int cycle_len = 1;        // T
  int on_len = 1;           // T_ON
  int selected_channel = 0; // 0-based index into the L unlicensed channels

  static CycleSchedule from_config(const SystemConfig& cfg, int channel = 0) {
    return {cfg.cycle_len, cfg.on_len, channel};
  }
};

/// True for subframes granted unlicensed access (t is 0-based).
inline bool is_on(int t, const CycleSchedule& sched) { return t < sched.on_len; }

inline bool is_on(int t, const SystemConfig& cfg) { return t < cfg.on_len; }

/// Least-interference channel, lowest index wins ties.
inline int select_channel(const std::vector<double>& per_channel_interference) {
  if (per_channel_interference.empty())
    throw std::invalid_argument("select_channel: empty interference list");
  int best = 0;
  for (int l = 1; l < static_cast<int>(per_channel_interference.size()); ++l)
    if (per_channel_interference[static_cast<size_t>(l)] <
        per_channel_interference[static_cast<size_t>(best)])
      best = l;
  return best;
}

/// Message count for one cycle of the sharing mechanism: channel-sensing
/// reports, per-subframe estimation reports, and allocation notifications.
inline int64_t signaling_overhead(const SystemConfig& cfg) {
  const int64_t M = cfg.num_iot, N = cfg.num_cus, K = cfg.num_licensed;
  const int64_t Ku = cfg.num_unlicensed_sub, L = cfg.num_unlicensed_channels;
  const int64_t T = cfg.cycle_len, Ton = cfg.on_len;
  int64_t scan = static_cast<int64_t>(cfg.sig_alpha) * M * L;
  int64_t report =
      static_cast<int64_t>(cfg.sig_beta) * ((M + N) * (T - Ton) * K + Ton * (M * (K + Ku) + N * K));
  int64_t notify = static_cast<int64_t>(cfg.sig_x) * (M + N) * T;
  return scan + report + notify;
}

}  // namespace iotu
