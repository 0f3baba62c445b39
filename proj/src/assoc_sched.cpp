// SPDX-License-Identifier: Apache-2.0
#include "iotu/assoc_sched.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace iotu {

namespace {
constexpr double kCoefDrop = 1e-13;  // negligible interference coefficients

double log2s(double x) { return std::log2(x); }

// Finite-difference coefficient of one interfering indicator: difference of
// the signal-bearing log term minus the difference of the signal-free one.
double cross_coef(double base, double signal_ref, double other_interf, double gain) {
  return (log2s(base + signal_ref + other_interf + gain) -
          log2s(base + signal_ref + other_interf)) -
         (log2s(base + other_interf + gain) - log2s(base + other_interf));
}

struct RowAccum {
  std::unordered_map<int, double> terms;
  void add(int var, double coef) {
    if (var < 0 || coef == 0.0) return;
    terms[var] += coef;
  }
  LpRow finish(Sense sense, double rhs) {
    LpRow row;
    row.coeffs.assign(terms.begin(), terms.end());
    std::sort(row.coeffs.begin(), row.coeffs.end());
    row.sense = sense;
    row.rhs = rhs;
    return row;
  }
};

}  // namespace

PowerMatrix PowerMatrix::equal_split(const SystemConfig& cfg) {
  PowerMatrix p;
  const int total = cfg.total_subchannels();
  p.cu = Tensor3<double>(cfg.num_cus, cfg.num_licensed, cfg.cycle_len,
                         cfg.p_cu_max / cfg.num_licensed);
  p.iot = Tensor4<double>(cfg.num_iot, cfg.num_idle_cus + 1, cfg.num_licensed, cfg.cycle_len,
                          cfg.p_iot_max / total);
  p.iot_u = Tensor4<double>(cfg.num_iot, cfg.num_idle_cus, cfg.num_unlicensed_sub, cfg.cycle_len,
                            cfg.p_iot_max / total);
  return p;
}

bool or_coupling_rows_hold(const std::vector<int>& group, int or_value) {
  const int size = static_cast<int>(group.size());
  int sum = 0;
  for (int g : group) sum += g;
  // -sum(1 - g) + size * (1 - or) <= 0  and  sum(1 - g) - (1 - or) <= size - 1
  bool first = -(size - sum) + size * (1 - or_value) <= 0;
  bool second = (size - sum) - (1 - or_value) <= size - 1;
  return first && second;
}

bool or_coupling_product_holds(const std::vector<int>& group, int or_value) {
  int prod = 1;
  for (int g : group) prod *= (1 - g);
  return 1 - or_value == prod;
}

LinearizedRates linearize_rates(const ChannelRealization& ch, const PowerMatrix& power,
                                const Allocation& reference, const SystemConfig& cfg,
                                const Topology& topo, int t) {
  LinearizedRates lr;
  lr.t = t;
  lr.N = cfg.num_cus;
  lr.M = cfg.num_iot;
  lr.Q = cfg.num_idle_cus;
  lr.K = cfg.num_licensed;
  lr.Ku = cfg.num_unlicensed_sub;
  const int N = lr.N, M = lr.M, Q = lr.Q, K = lr.K, Ku = lr.Ku;
  const double noise = cfg.noise_power;
  const bool on = t < cfg.on_len;

  lr.cellular.resize(static_cast<size_t>(N) * K);
  lr.direct.resize(static_cast<size_t>(M) * K);
  lr.m2m.resize(static_cast<size_t>(M) * Q * K);
  if (on) lr.m2m_u.resize(static_cast<size_t>(M) * Q * Ku);

  struct Interferer {
    int64_t key;
    double gain;
    bool ref;
    int m, a;
  };

  for (int k = 0; k < K; ++k) {
    // Interferers heard at the BS: every candidate aggregation link.
    std::vector<Interferer> bs_side;
    for (int m = 0; m < M; ++m)
      for (int a = 1; a <= Q; ++a)
        bs_side.push_back({var_key(VarKind::Theta, m, a, k),
                           power.iot(m, a, k, t) * ch.iot_bs(m, k, t),
                           reference.theta(m, a, k, t) != 0, m, a});
    double bs_ref = 0.0;
    for (const auto& it : bs_side)
      if (it.ref) bs_ref += it.gain;

    // skip_m < 0 with skip_a >= 1 drops one relay slot; skip_m >= 0 drops one
    // transmitter's links.
    auto expand_bs = [&](RateExpr& e, int64_t own_key, double signal, double own_ref, int skip_m,
                         int skip_a) {
      e.own_key = own_key;
      double interf_ref = bs_ref;
      for (const auto& it : bs_side)
        if (it.ref && (it.m == skip_m || it.a == skip_a)) interf_ref -= it.gain;
      e.own_coef = log2s(noise + interf_ref + signal) - log2s(noise + interf_ref);
      e.constant = 0.0;
      const double sref = signal * own_ref;
      for (const auto& it : bs_side) {
        if (it.m == skip_m || it.a == skip_a) continue;
        double other = interf_ref - (it.ref ? it.gain : 0.0);
        double coef = cross_coef(noise, sref, other, it.gain);
        if (std::abs(coef) < kCoefDrop) continue;
        e.cross.push_back({it.key, coef});
        if (it.ref) e.constant -= coef;
      }
    };

    for (int n = 0; n < N; ++n) {
      int own_slot = -1;
      for (int q = 0; q < Q; ++q)
        if (topo.idle_cu_ids[static_cast<size_t>(q)] == n) own_slot = q;
      expand_bs(lr.cellular[static_cast<size_t>(n) * K + k], var_key(VarKind::Phi, -1, n, k),
                power.cu(n, k, t) * ch.cu_bs(n, k, t), reference.phi(n, k, t) ? 1.0 : 0.0, -2,
                own_slot >= 0 ? own_slot + 1 : -2);
    }
    for (int m = 0; m < M; ++m)
      expand_bs(lr.direct[static_cast<size_t>(m) * K + k], var_key(VarKind::Theta, m, 0, k),
                power.iot(m, 0, k, t) * ch.iot_bs(m, k, t),
                reference.theta(m, 0, k, t) ? 1.0 : 0.0, m, -2);

    // Receivers at idle CUs.
    for (int q = 0; q < Q; ++q) {
      const int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
      std::vector<Interferer> side;
      for (int n = 0; n < N; ++n) {
        if (n == cu) continue;
        side.push_back({var_key(VarKind::Phi, -1, n, k), power.cu(n, k, t) * ch.cu_cu(n, q, k, t),
                        reference.phi(n, k, t) != 0, -1, -1});
      }
      for (int m2 = 0; m2 < M; ++m2)
        for (int a2 = 0; a2 <= Q; ++a2) {
          if (a2 == q + 1) continue;
          side.push_back({var_key(VarKind::Theta, m2, a2, k),
                          power.iot(m2, a2, k, t) * ch.iot_cu(m2, q, k, t),
                          reference.theta(m2, a2, k, t) != 0, m2, a2});
        }
      double side_ref = 0.0;
      for (const auto& it : side)
        if (it.ref) side_ref += it.gain;

      for (int m = 0; m < M; ++m) {
        RateExpr& e = lr.m2m[(static_cast<size_t>(m) * Q + q) * K + k];
        e.own_key = var_key(VarKind::Theta, m, q + 1, k);
        double signal = power.iot(m, q + 1, k, t) * ch.iot_cu(m, q, k, t);
        double m_ref = side_ref;
        for (const auto& it : side)
          if (it.ref && it.m == m) m_ref -= it.gain;  // a node does not jam itself
        e.own_coef = log2s(noise + m_ref + signal) - log2s(noise + m_ref);
        e.constant = 0.0;
        const double sref = signal * (reference.theta(m, q + 1, k, t) ? 1.0 : 0.0);
        for (const auto& it : side) {
          if (it.m == m) continue;
          double other = m_ref - (it.ref ? it.gain : 0.0);
          double coef = cross_coef(noise, sref, other, it.gain);
          if (std::abs(coef) < kCoefDrop) continue;
          e.cross.push_back({it.key, coef});
          if (it.ref) e.constant -= coef;
        }
      }
    }
  }

  if (on) {
    for (int k = 0; k < Ku; ++k)
      for (int q = 0; q < Q; ++q) {
        std::vector<Interferer> side;
        for (int m2 = 0; m2 < M; ++m2)
          for (int q2 = 0; q2 < Q; ++q2) {
            if (q2 == q) continue;
            side.push_back({var_key(VarKind::Beta, m2, q2, k),
                            power.iot_u(m2, q2, k, t) * ch.iot_cu_u(m2, q, k, t),
                            reference.beta(m2, q2, k, t) != 0, m2, q2});
          }
        double side_ref = 0.0;
        for (const auto& it : side)
          if (it.ref) side_ref += it.gain;
        const double base = noise + ch.wifi_interference(q, k, t);

        for (int m = 0; m < M; ++m) {
          RateExpr& e = lr.m2m_u[(static_cast<size_t>(m) * Q + q) * Ku + k];
          e.own_key = var_key(VarKind::Beta, m, q, k);
          double signal = power.iot_u(m, q, k, t) * ch.iot_cu_u(m, q, k, t);
          double m_ref = side_ref;
          for (const auto& it : side)
            if (it.ref && it.m == m) m_ref -= it.gain;
          e.own_coef = log2s(base + m_ref + signal) - log2s(base + m_ref);
          e.constant = 0.0;
          const double sref = signal * (reference.beta(m, q, k, t) ? 1.0 : 0.0);
          for (const auto& it : side) {
            if (it.m == m) continue;
            double other = m_ref - (it.ref ? it.gain : 0.0);
            double coef = cross_coef(base, sref, other, it.gain);
            if (std::abs(coef) < kCoefDrop) continue;
            e.cross.push_back({it.key, coef});
            if (it.ref) e.constant -= coef;
          }
        }
      }
  }
  return lr;
}

Sp3Model::Sp3Model(const ChannelRealization& ch, const PowerMatrix& power,
                   const SystemConfig& cfg, const Topology& topo, const Allocation& reference,
                   const FairnessWeights& weights, int t, const SchedOptions& opts)
    : cfg_(cfg), weights_(weights), t_(t), N_(cfg.num_cus), M_(cfg.num_iot),
      Q_(cfg.num_idle_cus), K_(cfg.num_licensed), Ku_(cfg.num_unlicensed_sub),
      on_(t < cfg.on_len), idle_ids_(topo.idle_cu_ids) {
  rates_ = linearize_rates(ch, power, reference, cfg, topo, t);
  build(topo, reference, opts);
}

void Sp3Model::build(const Topology& topo, const Allocation& reference,
                     const SchedOptions& opts) {
  const bool unlic = on_ && opts.allow_unlicensed && Ku_ > 0;

  // Presolve: a pair survives when the linearized rows could cover the
  // device's traffic under that association (other pairs contribute at most
  // their own-indicator-off residue), or when the reference already uses it.
  std::vector<uint8_t> pair_alive(static_cast<size_t>(M_) * (Q_ + 1), 0);
  auto alive = [&](int m, int a) -> uint8_t& {
    return pair_alive[static_cast<size_t>(m) * (Q_ + 1) + a];
  };

  for (int m = 0; m < M_; ++m) {
    const double d = cfg_.traffic[static_cast<size_t>(m)];
    bool ref_direct = false;
    double direct_max = 0.0;
    for (int k = 0; k < K_; ++k) {
      direct_max += std::max(0.0, rates_.dir(m, k).box_max());
      ref_direct |= reference.theta(m, 0, k, t_) != 0;
    }
    if (ref_direct || direct_max >= d) alive(m, 0) = 1;

    if (opts.allow_m2m && Q_ > 0) {
      std::vector<double> pair_max(static_cast<size_t>(Q_), 0.0);
      std::vector<double> phantom(static_cast<size_t>(Q_), 0.0);
      std::vector<uint8_t> ref_pair(static_cast<size_t>(Q_), 0);
      for (int q = 0; q < Q_; ++q) {
        for (int k = 0; k < K_; ++k) {
          pair_max[static_cast<size_t>(q)] += std::max(0.0, rates_.agg(m, q, k).box_max());
          phantom[static_cast<size_t>(q)] +=
              std::max(0.0, rates_.agg(m, q, k).box_max_own_zero());
          ref_pair[static_cast<size_t>(q)] |= reference.theta(m, q + 1, k, t_) != 0;
        }
        if (unlic)
          for (int k = 0; k < Ku_; ++k) {
            pair_max[static_cast<size_t>(q)] += std::max(0.0, rates_.agg_u(m, q, k).box_max());
            phantom[static_cast<size_t>(q)] +=
                std::max(0.0, rates_.agg_u(m, q, k).box_max_own_zero());
          }
      }
      double phantom_total = 0.0;
      for (double v : phantom) phantom_total += v;
      for (int q = 0; q < Q_; ++q) {
        double bound =
            pair_max[static_cast<size_t>(q)] + phantom_total - phantom[static_cast<size_t>(q)];
        if (ref_pair[static_cast<size_t>(q)] || bound >= d) alive(m, q + 1) = 1;
      }
    }
  }

  // When an active CU cannot reach its floor even with every subchannel at
  // the working power, the whole subframe degenerates to the all-zero slice.
  for (int n = 0; n < N_ && !qos_impossible_; ++n) {
    if (topo.is_idle_cu(n)) continue;
    double best = 0.0;
    for (int k = 0; k < K_; ++k) best += std::max(0.0, rates_.cell(n, k).box_max());
    if (best < cfg_.rate_min) qos_impossible_ = true;
  }

  phi_id_.assign(static_cast<size_t>(N_) * K_, -1);
  theta_id_.assign(static_cast<size_t>(M_) * (Q_ + 1) * K_, -1);
  beta_id_.assign(static_cast<size_t>(M_) * Q_ * std::max(Ku_, 1), -1);
  f_id_.assign(static_cast<size_t>(M_) * (Q_ + 1), -1);
  c_id_.assign(static_cast<size_t>(M_), -1);
  if (qos_impossible_) return;

  std::vector<uint8_t> slot_used(static_cast<size_t>(std::max(Q_, 1)), 0);
  for (int m = 0; m < M_; ++m)
    for (int q = 0; q < Q_; ++q) slot_used[static_cast<size_t>(q)] |= alive(m, q + 1);

  int next = 0;
  std::vector<std::string> names;
  auto new_var = [&](std::string name) {
    names.push_back(std::move(name));
    return next++;
  };

  for (int n = 0; n < N_; ++n) {
    bool idle = topo.is_idle_cu(n);
    bool want = !idle;
    if (idle)
      for (int q = 0; q < Q_; ++q)
        if (idle_ids_[static_cast<size_t>(q)] == n && slot_used[static_cast<size_t>(q)])
          want = true;
    if (!want) continue;
    for (int k = 0; k < K_; ++k)
      phi_id_[static_cast<size_t>(n) * K_ + k] =
          new_var("phi_n" + std::to_string(n) + "_k" + std::to_string(k));
  }
  for (int m = 0; m < M_; ++m) {
    for (int a = 0; a <= Q_; ++a) {
      if (!alive(m, a)) continue;
      for (int k = 0; k < K_; ++k)
        theta_id_[(static_cast<size_t>(m) * (Q_ + 1) + a) * K_ + k] = new_var(
            "theta_m" + std::to_string(m) + "_a" + std::to_string(a) + "_k" + std::to_string(k));
      f_id_[static_cast<size_t>(m) * (Q_ + 1) + a] =
          new_var("f_m" + std::to_string(m) + "_a" + std::to_string(a));
      if (unlic && a >= 1)
        for (int k = 0; k < Ku_; ++k)
          beta_id_[(static_cast<size_t>(m) * Q_ + (a - 1)) * Ku_ + k] =
              new_var("beta_m" + std::to_string(m) + "_q" + std::to_string(a - 1) + "_u" +
                      std::to_string(k));
    }
    bool any = false;
    for (int a = 0; a <= Q_; ++a) any |= alive(m, a) != 0;
    if (any) c_id_[static_cast<size_t>(m)] = new_var("c_m" + std::to_string(m));
  }

  inst_.ncols = next;
  inst_.obj = VectorXd::Zero(next);
  inst_.var_names = std::move(names);

  // Scheduling indicators drive the search; branch on them first.
  inst_.branch_priority.assign(static_cast<size_t>(next), 0);
  for (int m = 0; m < M_; ++m) {
    if (var_c(m) >= 0) inst_.branch_priority[static_cast<size_t>(var_c(m))] = 2;
    for (int a = 0; a <= Q_; ++a)
      if (var_f(m, a) >= 0) inst_.branch_priority[static_cast<size_t>(var_f(m, a))] = 1;
  }

  auto id_of = [&](int64_t key) -> int {
    int k = static_cast<int>(key & 0xFFF) - 1;
    int a = static_cast<int>((key >> 12) & 0xFFF) - 1;
    int m = static_cast<int>((key >> 24) & 0xFFFF) - 1;
    switch (static_cast<VarKind>(key >> 40)) {
      case VarKind::Phi: return var_phi(a, k);
      case VarKind::Theta: return var_theta(m, a, k);
      case VarKind::Beta: return var_beta(m, a, k);
      case VarKind::F: return var_f(m, a);
      case VarKind::C: return var_c(m);
    }
    return -1;
  };
  auto add_expr = [&](RowAccum& acc, const RateExpr& e, double sign, double& const_sum) {
    acc.add(id_of(e.own_key), sign * e.own_coef);
    for (auto& [key, coef] : e.cross) acc.add(id_of(key), sign * coef);
    const_sum += sign * e.constant;
  };

  // Subchannel exclusivity.
  for (int q = 0; q < Q_; ++q) {
    const int cu = idle_ids_[static_cast<size_t>(q)];
    for (int k = 0; k < K_; ++k) {
      RowAccum acc;
      acc.add(var_phi(cu, k), 1.0);
      for (int m = 0; m < M_; ++m) acc.add(var_theta(m, q + 1, k), 1.0);
      if (!acc.terms.empty()) inst_.rows.push_back(acc.finish(Sense::LE, 1.0));
    }
    if (unlic)
      for (int k = 0; k < Ku_; ++k) {
        RowAccum acc;
        for (int m = 0; m < M_; ++m) acc.add(var_beta(m, q, k), 1.0);
        if (!acc.terms.empty()) inst_.rows.push_back(acc.finish(Sense::LE, 1.0));
      }
  }
  for (int k = 0; k < K_; ++k) {
    RowAccum acc;
    for (int n = 0; n < N_; ++n) acc.add(var_phi(n, k), 1.0);
    for (int m = 0; m < M_; ++m) acc.add(var_theta(m, 0, k), 1.0);
    if (!acc.terms.empty()) inst_.rows.push_back(acc.finish(Sense::LE, 1.0));
  }

  for (int m = 0; m < M_; ++m) {
    if (var_c(m) < 0) continue;

    bool has_idle_pair = false;
    for (int a = 1; a <= Q_; ++a) has_idle_pair |= alive(m, a) != 0;
    // The carrier-aggregation anchor needs no row of its own: an
    // aggregation-mode association forces a licensed subchannel through the
    // OR-coupling rows below.

    // Single association and the OR coupling between c and the f group.
    {
      RowAccum acc;
      for (int a = 0; a <= Q_; ++a) acc.add(var_f(m, a), 1.0);
      acc.add(var_c(m), -1.0);
      inst_.rows.push_back(acc.finish(Sense::LE, 0.0));
    }
    {
      RowAccum acc;
      for (int a = 0; a <= Q_; ++a) acc.add(var_f(m, a), 1.0);
      acc.add(var_c(m), -static_cast<double>(Q_ + 1));
      inst_.rows.push_back(acc.finish(Sense::LE, 0.0));
    }
    {
      RowAccum acc;
      acc.add(var_c(m), 1.0);
      for (int a = 0; a <= Q_; ++a) acc.add(var_f(m, a), -1.0);
      inst_.rows.push_back(acc.finish(Sense::LE, 0.0));
    }

    // OR coupling between each f and its subchannel group; unlicensed use
    // additionally requires the association.
    for (int a = 0; a <= Q_; ++a) {
      if (!alive(m, a)) continue;
      {
        RowAccum acc;
        for (int k = 0; k < K_; ++k) acc.add(var_theta(m, a, k), 1.0);
        acc.add(var_f(m, a), -static_cast<double>(K_));
        inst_.rows.push_back(acc.finish(Sense::LE, 0.0));
      }
      {
        RowAccum acc;
        acc.add(var_f(m, a), 1.0);
        for (int k = 0; k < K_; ++k) acc.add(var_theta(m, a, k), -1.0);
        inst_.rows.push_back(acc.finish(Sense::LE, 0.0));
      }
      if (unlic && a >= 1) {
        RowAccum acc;
        for (int k = 0; k < Ku_; ++k) acc.add(var_beta(m, a - 1, k), 1.0);
        acc.add(var_f(m, a), -static_cast<double>(Ku_));
        inst_.rows.push_back(acc.finish(Sense::LE, 0.0));
      }
    }

    const double d = cfg_.traffic[static_cast<size_t>(m)];

    // Cellular-mode rate coverage, big-M gated on the BS association.
    if (alive(m, 0)) {
      RowAccum acc;
      double const_sum = 0.0, row_min = 0.0;
      for (int k = 0; k < K_; ++k) {
        add_expr(acc, rates_.dir(m, k), 1.0, const_sum);
        row_min += rates_.dir(m, k).box_min();
      }
      double big_m = std::max(0.0, d - row_min) + 1.0;
      acc.add(var_c(m), -d);
      acc.add(var_f(m, 0), -big_m);
      inst_.rows.push_back(acc.finish(Sense::GE, -big_m - const_sum));
    }

    // Aggregation-mode rate coverage, gated on having an idle-CU association.
    if (has_idle_pair) {
      RowAccum acc;
      double const_sum = 0.0, row_min = 0.0;
      for (int a = 1; a <= Q_; ++a) {
        if (!alive(m, a)) continue;
        for (int k = 0; k < K_; ++k) {
          add_expr(acc, rates_.agg(m, a - 1, k), 1.0, const_sum);
          row_min += rates_.agg(m, a - 1, k).box_min();
        }
        if (unlic)
          for (int k = 0; k < Ku_; ++k) {
            add_expr(acc, rates_.agg_u(m, a - 1, k), 1.0, const_sum);
            row_min += rates_.agg_u(m, a - 1, k).box_min();
          }
      }
      double big_m = std::max(0.0, d - row_min) + 1.0;
      acc.add(var_c(m), -d);
      for (int a = 1; a <= Q_; ++a) acc.add(var_f(m, a), -big_m);
      inst_.rows.push_back(acc.finish(Sense::GE, -big_m - const_sum));
    }
  }

  // Idle-CU coverage: the uplink must carry what the cluster aggregates.
  for (int q = 0; q < Q_; ++q) {
    if (!slot_used[static_cast<size_t>(q)]) continue;
    const int cu = idle_ids_[static_cast<size_t>(q)];
    RowAccum acc;
    double const_sum = 0.0;
    for (int k = 0; k < K_; ++k) add_expr(acc, rates_.cell(cu, k), 1.0, const_sum);
    for (int m = 0; m < M_; ++m) {
      if (!pair_alive[static_cast<size_t>(m) * (Q_ + 1) + q + 1]) continue;
      for (int k = 0; k < K_; ++k) add_expr(acc, rates_.agg(m, q, k), -1.0, const_sum);
      if (unlic)
        for (int k = 0; k < Ku_; ++k) add_expr(acc, rates_.agg_u(m, q, k), -1.0, const_sum);
    }
    inst_.rows.push_back(acc.finish(Sense::GE, -const_sum));
  }

  // Active-CU rate floor.
  for (int n = 0; n < N_; ++n) {
    if (topo.is_idle_cu(n)) continue;
    RowAccum acc;
    double const_sum = 0.0;
    for (int k = 0; k < K_; ++k) add_expr(acc, rates_.cell(n, k), 1.0, const_sum);
    inst_.rows.push_back(acc.finish(Sense::GE, cfg_.rate_min - const_sum));
  }
}

VectorXd Sp3Model::objective(const VectorXd& delta, double* offset) const {
  VectorXd obj = VectorXd::Zero(inst_.ncols);
  double off = 0.0;
  for (int m = 0; m < M_; ++m) {
    double lam = weights_.lambda[static_cast<size_t>(m)];
    off += (1.0 - cfg_.epsilon) * lam - delta[m] / cfg_.cycle_len;
    if (var_c(m) >= 0) obj[var_c(m)] = -(1.0 - cfg_.epsilon) * lam + delta[m];
  }
  if (offset) *offset = off;
  return obj;
}

void Sp3Model::apply(const std::vector<uint8_t>& x, const PowerMatrix& power,
                     Allocation& al) const {
  const int t = t_;
  for (int m = 0; m < M_; ++m) al.unschedule(m, t);
  for (int n = 0; n < N_; ++n)
    for (int k = 0; k < K_; ++k) {
      al.phi(n, k, t) = 0;
      al.p_cu(n, k, t) = 0.0;
    }
  if (x.empty()) return;

  auto set = [&](int id) { return id >= 0 && x[static_cast<size_t>(id)] != 0; };
  for (int m = 0; m < M_; ++m) {
    if (set(var_c(m))) al.sched(m, t) = 1;
    for (int a = 0; a <= Q_; ++a) {
      if (set(var_f(m, a))) al.assoc(m, a, t) = 1;
      for (int k = 0; k < K_; ++k)
        if (set(var_theta(m, a, k))) {
          al.theta(m, a, k, t) = 1;
          al.p_iot(m, a, k, t) = power.iot(m, a, k, t);
        }
      if (a >= 1)
        for (int k = 0; k < Ku_; ++k)
          if (set(var_beta(m, a - 1, k))) {
            al.beta(m, a - 1, k, t) = 1;
            al.p_iot_u(m, a - 1, k, t) = power.iot_u(m, a - 1, k, t);
          }
    }
  }
  for (int n = 0; n < N_; ++n) {
    int slot = -1;
    for (int q = 0; q < Q_; ++q)
      if (idle_ids_[static_cast<size_t>(q)] == n) slot = q;
    bool keep = slot < 0;  // active CUs keep their uplink
    if (slot >= 0)
      for (int m = 0; m < M_ && !keep; ++m)
        for (int k = 0; k < K_ && !keep; ++k)
          if (al.theta(m, slot + 1, k, t)) keep = true;
    if (!keep) continue;
    for (int k = 0; k < K_; ++k)
      if (set(var_phi(n, k))) {
        al.phi(n, k, t) = 1;
        al.p_cu(n, k, t) = power.cu(n, k, t);
      }
  }
}

Sp3Result solve_sp3(Sp3Model& model, IlpSolver& solver, const VectorXd& delta,
                    const std::vector<uint8_t>* warm) {
  Sp3Result out;
  if (model.qos_impossible() || model.instance().ncols == 0) {
    out.all_zero = true;
    return out;
  }
  double offset = 0.0;
  VectorXd obj = model.objective(delta, &offset);
  solver.set_objective(obj, offset);
  const std::vector<uint8_t>* w =
      warm && static_cast<int>(warm->size()) == model.instance().ncols ? warm : nullptr;
  IlpResult res = solver.solve(w);
  if (res.x.empty()) {
    out.all_zero = true;
    out.proven_optimal = res.status == IlpResult::Status::Infeasible;
    return out;
  }
  out.x = std::move(res.x);
  out.objective = res.obj;
  out.proven_optimal = res.proven_optimal;
  return out;
}

VectorXd update_delta(const VectorXd& delta, const Allocation& al, const SystemConfig& cfg) {
  VectorXd next = delta;
  for (int m = 0; m < al.M; ++m) {
    int times = 0;
    for (int t = 0; t < al.T; ++t) times += al.sched(m, t) ? 1 : 0;
    next[m] = std::max(0.0, delta[m] - cfg.step_delta * (1.0 - times));
  }
  return next;
}

AssocSchedOutcome solve_association_scheduling(const ChannelRealization& ch,
                                               const PowerMatrix& power, const SystemConfig& cfg,
                                               const Topology& topo, const Allocation& reference,
                                               const FairnessWeights& weights,
                                               const SchedOptions& opts) {
  const int T = cfg.cycle_len, M = cfg.num_iot;
  std::vector<std::unique_ptr<Sp3Model>> models;
  std::vector<std::unique_ptr<IlpSolver>> solvers;
  for (int t = 0; t < T; ++t) {
    models.push_back(
        std::make_unique<Sp3Model>(ch, power, cfg, topo, reference, weights, t, opts));
    solvers.push_back(std::make_unique<IlpSolver>(models.back()->instance(), opts.node_limit));
    if (opts.dump_ilp) models.back()->instance().dump(*opts.dump_ilp);
  }

  AssocSchedOutcome out;
  out.alloc = Allocation(cfg);
  out.delta = VectorXd::Zero(M);
  double best_metric = -std::numeric_limits<double>::infinity();
  std::vector<std::vector<uint8_t>> warm(static_cast<size_t>(T));
  int stall = 0;

  VectorXd delta = VectorXd::Zero(M);
  Allocation trial(cfg);
  for (int iter = 1; iter <= opts.max_dual_iters; ++iter) {
    out.dual_iterations = iter;
    for (int t = 0; t < T; ++t) {
      Sp3Result res = solve_sp3(*models[static_cast<size_t>(t)], *solvers[static_cast<size_t>(t)],
                                delta, &warm[static_cast<size_t>(t)]);
      if (res.all_zero) {
        std::vector<uint8_t> zeros(
            static_cast<size_t>(models[static_cast<size_t>(t)]->instance().ncols), 0);
        models[static_cast<size_t>(t)]->apply(zeros, power, trial);
        warm[static_cast<size_t>(t)].clear();
      } else {
        models[static_cast<size_t>(t)]->apply(res.x, power, trial);
        warm[static_cast<size_t>(t)] = std::move(res.x);
      }
    }

    VectorXd next = update_delta(delta, trial, cfg);

    // Earliest-subframe repair restores the once-per-cycle constraint.
    Allocation repaired = trial;
    for (int m = 0; m < M; ++m) {
      bool seen = false;
      for (int t = 0; t < T; ++t) {
        if (!repaired.sched(m, t)) continue;
        if (seen)
          repaired.unschedule(m, t);
        else
          seen = true;
      }
    }
    double metric = (1.0 - cfg.epsilon) * weighted_scheduled(repaired, weights) -
                    cfg.epsilon * repaired.total_power();
    if (metric > best_metric + 1e-12) {
      best_metric = metric;
      out.alloc = repaired;
      stall = 0;
    } else {
      ++stall;
    }

    double move = (next - delta).cwiseAbs().maxCoeff();
    delta = next;
    if (move < opts.delta_tol) {
      out.converged = true;
      break;
    }
    if (stall >= opts.patience) break;
  }
  out.delta = delta;
  return out;
}

}  // namespace iotu
