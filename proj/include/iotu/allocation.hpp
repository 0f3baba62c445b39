// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "iotu/config.hpp"
#include "iotu/types.hpp"

namespace iotu {

/// Decision variables of the single-stage problem. Receiver index `a` of the
/// theta/assoc tensors ranges over {0 = BS, 1..Q = idle slot a-1}; beta and
/// the unlicensed power tensor use the idle slot q in [0, Q) directly.
/// Invariants: beta is zero on OFF subframes and every power entry is zero
/// wherever its matching indicator is zero.
struct Allocation {
  int M = 0, N = 0, Q = 0, K = 0, Ku = 0, T = 0;

  Tensor3<uint8_t> phi;      // [n][k][t] cellular subchannel use
  Tensor4<uint8_t> theta;    // [m][a][k][t] licensed allocation of link m-a
  Tensor4<uint8_t> beta;     // [m][q][ku][t] unlicensed allocation
  Tensor3<uint8_t> assoc;    // [m][a][t] association indicator
  std::vector<uint8_t> sched_;  // [m*T + t] scheduling indicator

  Tensor3<double> p_cu;      // [n][k][t] watts
  Tensor4<double> p_iot;     // [m][a][k][t] watts, licensed
  Tensor4<double> p_iot_u;   // [m][q][ku][t] watts, unlicensed

  Allocation() = default;
  explicit Allocation(const SystemConfig& cfg)
      : M(cfg.num_iot), N(cfg.num_cus), Q(cfg.num_idle_cus), K(cfg.num_licensed),
        Ku(cfg.num_unlicensed_sub), T(cfg.cycle_len),
        phi(N, K, T), theta(M, Q + 1, K, T), beta(M, Q, Ku, T), assoc(M, Q + 1, T),
        sched_(static_cast<size_t>(M) * T, 0),
        p_cu(N, K, T), p_iot(M, Q + 1, K, T), p_iot_u(M, Q, Ku, T) {}

  uint8_t& sched(int m, int t) { return sched_[static_cast<size_t>(m) * T + t]; }
  uint8_t sched(int m, int t) const { return sched_[static_cast<size_t>(m) * T + t]; }

  /// Association of device m in subframe t: -1 none, 0 BS, a >= 1 idle slot a-1.
  int association(int m, int t) const {
    for (int a = 0; a <= Q; ++a)
      if (assoc(m, a, t)) return a;
    return -1;
  }

  bool scheduled_anywhere(int m) const {
    for (int t = 0; t < T; ++t)
      if (sched(m, t)) return true;
    return false;
  }

  double total_power() const {
    double s = 0.0;
    for (double v : p_cu.raw()) s += v;
    for (double v : p_iot.raw()) s += v;
    for (double v : p_iot_u.raw()) s += v;
    return s;
  }

  /// Removes device m from subframe t: scheduling, association, subchannels,
  /// and power all zeroed.
  void unschedule(int m, int t) {
    sched(m, t) = 0;
    for (int a = 0; a <= Q; ++a) {
      assoc(m, a, t) = 0;
      for (int k = 0; k < K; ++k) {
        theta(m, a, k, t) = 0;
        p_iot(m, a, k, t) = 0.0;
      }
    }
    for (int q = 0; q < Q; ++q)
      for (int k = 0; k < Ku; ++k) {
        beta(m, q, k, t) = 0;
        p_iot_u(m, q, k, t) = 0.0;
      }
  }
};

/// Proportional-fairness weights: w_m inversely proportional to historical
/// scheduling frequency, lambda_m the positive-integer scaling by rho.
struct FairnessWeights {
  std::vector<double> w;
  std::vector<int> lambda;
  double rho = 100.0;

  double lambda_sum() const {
    double s = 0.0;
    for (int l : lambda) s += l;
    return s;
  }
};

/// w_m = 1 / (1 + average scheduled count), lambda_m = round(rho * w_m)
/// clamped to >= 1. An empty history yields uniform weights.
FairnessWeights fairness_weights(const std::vector<double>& avg_sched_count,
                                 const SystemConfig& cfg);

}  // namespace iotu
