// SPDX-License-Identifier: Apache-2.0
// Shared fixtures: hand-built configs, topologies, and channel realizations
// small enough to cross-check against naive re-implementations.
#pragma once

#include "iotu/allocation.hpp"
#include "iotu/scenario.hpp"

namespace iotu_test {

using namespace iotu;

inline SystemConfig make_cfg(int M, int N, int Q, int K, int Ku, int T, int Ton) {
  SystemConfig cfg;
  cfg.num_iot = M;
  cfg.num_cus = N;
  cfg.num_idle_cus = Q;
  cfg.num_wifi = 1;
  cfg.num_licensed = K;
  cfg.num_unlicensed_sub = Ku;
  cfg.num_unlicensed_channels = 2;
  cfg.cycle_len = T;
  cfg.on_len = Ton;
  cfg.noise_power = 1e-13;
  cfg.p_iot_max = 0.02;
  cfg.p_cu_max = 0.2;
  cfg.p_wifi = 0.2;
  cfg.rate_min = 1.0;
  cfg.set_uniform_traffic(1.0);
  cfg.epsilon = 0.5 * cfg.epsilon_bound();
  cfg.rng_seed = 1;
  return cfg;
}

/// CUs on an inner ring, devices on an outer ring, WUs opposite; the first Q
/// CUs are the idle ones.
inline Topology make_topology(const SystemConfig& cfg, Rng& rng) {
  Topology topo;
  topo.bs_position = {0.0, 0.0};
  for (int n = 0; n < cfg.num_cus; ++n) {
    double ang = 2.0 * M_PI * (n + 0.3) / std::max(1, cfg.num_cus);
    double r = 0.25 * cfg.cell_radius * (1.0 + 0.3 * rng.uniform());
    topo.cu_positions.push_back({r * std::cos(ang), r * std::sin(ang)});
  }
  for (int m = 0; m < cfg.num_iot; ++m) {
    double ang = 2.0 * M_PI * (m + 0.7) / std::max(1, cfg.num_iot);
    double r = 0.5 * cfg.cell_radius * (1.0 + 0.6 * rng.uniform());
    topo.iot_positions.push_back({r * std::cos(ang), r * std::sin(ang)});
  }
  for (int f = 0; f < cfg.num_wifi; ++f)
    topo.wifi_positions.push_back({0.8 * cfg.cell_radius, 10.0 * (f + 1)});
  for (int q = 0; q < cfg.num_idle_cus; ++q) topo.idle_cu_ids.push_back(q);
  return topo;
}

inline ChannelRealization random_channels(const Topology& topo, const SystemConfig& cfg,
                                          Rng& rng) {
  return generate_channels(topo, cfg, rng);
}

/// Random trial point: indicators drawn with the given density, powers
/// uniform on [0, cap] wherever an indicator is set.
inline Allocation random_allocation(const SystemConfig& cfg, Rng& rng, double density = 0.25) {
  Allocation al(cfg);
  for (int m = 0; m < al.M; ++m)
    for (int a = 0; a <= al.Q; ++a)
      for (int k = 0; k < al.K; ++k)
        for (int t = 0; t < al.T; ++t)
          if (rng.uniform() < density) {
            al.theta(m, a, k, t) = 1;
            al.p_iot(m, a, k, t) = rng.uniform() * cfg.p_iot_max / (al.K + 1);
          }
  for (int m = 0; m < al.M; ++m)
    for (int q = 0; q < al.Q; ++q)
      for (int k = 0; k < al.Ku; ++k)
        for (int t = 0; t < cfg.on_len; ++t)
          if (rng.uniform() < density) {
            al.beta(m, q, k, t) = 1;
            al.p_iot_u(m, q, k, t) = rng.uniform() * cfg.p_iot_max / (al.Ku + 1);
          }
  for (int n = 0; n < al.N; ++n)
    for (int k = 0; k < al.K; ++k)
      for (int t = 0; t < al.T; ++t)
        if (rng.uniform() < density) {
          al.phi(n, k, t) = 1;
          al.p_cu(n, k, t) = rng.uniform() * cfg.p_cu_max / al.K;
        }
  for (int m = 0; m < al.M; ++m)
    for (int t = 0; t < al.T; ++t) {
      if (rng.uniform() < density) al.sched(m, t) = 1;
      for (int a = 0; a <= al.Q; ++a)
        if (rng.uniform() < density * 0.5) al.assoc(m, a, t) = 1;
    }
  return al;
}

inline FairnessWeights uniform_weights(const SystemConfig& cfg) {
  return fairness_weights({}, cfg);
}

}  // namespace iotu_test
