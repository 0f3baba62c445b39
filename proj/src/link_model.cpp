// SPDX-License-Identifier: Apache-2.0
#include "iotu/link_model.hpp"

#include <stdexcept>

namespace iotu {

namespace {

// Interference heard at the BS on subchannel k from aggregation-mode M2M
// links, optionally excluding those relayed by one idle slot.
double m2m_noise_at_bs(const Allocation& al, const ChannelRealization& ch, int k, int t,
                       int exclude_slot, int exclude_device) {
  double acc = 0.0;
  for (int m = 0; m < al.M; ++m) {
    if (m == exclude_device) continue;
    for (int a = 1; a <= al.Q; ++a) {
      if (a - 1 == exclude_slot) continue;
      if (al.theta(m, a, k, t)) acc += al.p_iot(m, a, k, t) * ch.iot_bs(m, k, t);
    }
  }
  return acc;
}

}  // namespace

double sinr_cellular(const Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                     const Topology& topo, int n, int k, int t) {
  if (!al.phi(n, k, t)) return 0.0;
  double signal = al.p_cu(n, k, t) * ch.cu_bs(n, k, t);
  int own_slot = -1;
  for (int q = 0; q < al.Q; ++q)
    if (topo.idle_cu_ids[static_cast<size_t>(q)] == n) own_slot = q;
  double denom = cfg.noise_power + m2m_noise_at_bs(al, ch, k, t, own_slot, -1);
  return signal / denom;
}

double sinr_iot_direct(const Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                       int m, int k, int t) {
  if (!al.theta(m, 0, k, t)) return 0.0;
  double signal = al.p_iot(m, 0, k, t) * ch.iot_bs(m, k, t);
  double denom = cfg.noise_power + m2m_noise_at_bs(al, ch, k, t, -1, m);
  return signal / denom;
}

double sinr_m2m_licensed(const Allocation& al, const ChannelRealization& ch,
                         const SystemConfig& cfg, const Topology& topo, int m, int q, int k,
                         int t) {
  if (!al.theta(m, q + 1, k, t)) return 0.0;
  const int cu_id = topo.idle_cu_ids[static_cast<size_t>(q)];
  double signal = al.p_iot(m, q + 1, k, t) * ch.iot_cu(m, q, k, t);
  double denom = cfg.noise_power;
  for (int n = 0; n < al.N; ++n) {
    if (n == cu_id) continue;
    if (al.phi(n, k, t)) denom += al.p_cu(n, k, t) * ch.cu_cu(n, q, k, t);
  }
  for (int m2 = 0; m2 < al.M; ++m2) {
    if (m2 == m) continue;
    for (int a = 0; a <= al.Q; ++a) {
      if (a == q + 1) continue;
      if (al.theta(m2, a, k, t)) denom += al.p_iot(m2, a, k, t) * ch.iot_cu(m2, q, k, t);
    }
  }
  return signal / denom;
}

double sinr_m2m_unlicensed(const Allocation& al, const ChannelRealization& ch,
                           const SystemConfig& cfg, int m, int q, int k, int t) {
  if (t >= cfg.on_len) throw std::domain_error("unlicensed transmission outside ON mode");
  if (!al.beta(m, q, k, t)) return 0.0;
  double signal = al.p_iot_u(m, q, k, t) * ch.iot_cu_u(m, q, k, t);
  double denom = cfg.noise_power + ch.wifi_interference(q, k, t);
  for (int m2 = 0; m2 < al.M; ++m2) {
    if (m2 == m) continue;
    for (int q2 = 0; q2 < al.Q; ++q2) {
      if (q2 == q) continue;
      if (al.beta(m2, q2, k, t)) denom += al.p_iot_u(m2, q2, k, t) * ch.iot_cu_u(m2, q, k, t);
    }
  }
  return signal / denom;
}

SubframeRates compute_rates(const Allocation& al, const ChannelRealization& ch,
                            const SystemConfig& cfg, const Topology& topo, int t) {
  SubframeRates r;
  r.cellular = MatrixXd::Zero(al.N, al.K);
  r.direct = MatrixXd::Zero(al.M, al.K);
  r.m2m = Tensor3<double>(al.M, al.Q, al.K, 0.0);
  r.m2m_u = Tensor3<double>(al.M, al.Q, al.Ku, 0.0);

  for (int n = 0; n < al.N; ++n)
    for (int k = 0; k < al.K; ++k)
      if (al.phi(n, k, t)) r.cellular(n, k) = rate(sinr_cellular(al, ch, cfg, topo, n, k, t));
  for (int m = 0; m < al.M; ++m)
    for (int k = 0; k < al.K; ++k)
      if (al.theta(m, 0, k, t)) r.direct(m, k) = rate(sinr_iot_direct(al, ch, cfg, m, k, t));
  for (int m = 0; m < al.M; ++m)
    for (int q = 0; q < al.Q; ++q)
      for (int k = 0; k < al.K; ++k)
        if (al.theta(m, q + 1, k, t))
          r.m2m(m, q, k) = rate(sinr_m2m_licensed(al, ch, cfg, topo, m, q, k, t));
  if (t < cfg.on_len)
    for (int m = 0; m < al.M; ++m)
      for (int q = 0; q < al.Q; ++q)
        for (int k = 0; k < al.Ku; ++k)
          if (al.beta(m, q, k, t))
            r.m2m_u(m, q, k) = rate(sinr_m2m_unlicensed(al, ch, cfg, m, q, k, t));
  return r;
}

}  // namespace iotu
