// SPDX-License-Identifier: Apache-2.0
#include "iotu/iaspa.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace iotu {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Drops the cheapest-weight offender among the flagged devices scheduled in
// subframe t. Returns the device id, or -1 when nothing can be dropped.
int drop_offender(Allocation& al, const std::vector<int>& flagged,
                  const FairnessWeights& weights, int t) {
  int pick = -1;
  for (int m : flagged) {
    if (m < 0 || m >= al.M || !al.sched(m, t)) continue;
    if (pick < 0 ||
        weights.lambda[static_cast<size_t>(m)] < weights.lambda[static_cast<size_t>(pick)])
      pick = m;
  }
  if (pick >= 0) al.unschedule(pick, t);
  return pick;
}

// Relay uplinks whose cluster emptied out carry no traffic: switch them off.
void prune_idle_uplinks(Allocation& al, const Topology& topo, int t) {
  for (int q = 0; q < al.Q; ++q) {
    bool used = false;
    for (int m = 0; m < al.M && !used; ++m)
      for (int k = 0; k < al.K && !used; ++k)
        if (al.theta(m, q + 1, k, t)) used = true;
    if (used) continue;
    int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
    for (int k = 0; k < al.K; ++k) {
      al.phi(cu, k, t) = 0;
      al.p_cu(cu, k, t) = 0.0;
    }
  }
}

// Power minimization across the cycle with infeasibility recovery: flagged
// devices are unscheduled cheapest-weight-first and the subframe re-solved.
void power_phase(Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                 const Topology& topo, const FairnessWeights& weights, RunTrace& trace,
                 int outer_iter) {
  for (int t = 0; t < cfg.cycle_len; ++t) {
    for (int attempt = 0; attempt <= al.M + al.N + 1; ++attempt) {
      prune_idle_uplinks(al, topo, t);
      Sp5Result res = solve_sp5(al, ch, cfg, topo, t);
      trace.sp5_rows.push_back({outer_iter, t, res.trace.outer_rounds,
                                res.trace.inner_iterations, res.trace.fallback_count,
                                res.trace.objective, res.trace.max_mult_move});
      if (res.feasible) break;
      if (!res.infeasible_devices.empty()) {
        if (drop_offender(al, res.infeasible_devices, weights, t) >= 0) {
          ++trace.dropped_devices;
          continue;
        }
      }
      if (!res.outage_cus.empty()) {
        for (int n : res.outage_cus)
          for (int k = 0; k < al.K; ++k) {
            al.phi(n, k, t) = 0;
            al.p_cu(n, k, t) = 0.0;
          }
        ++trace.cu_outages;
        continue;
      }
      break;  // nothing left to adjust
    }
  }
}

struct PipelineOptions {
  bool allow_m2m = true;
  bool allow_unlicensed = true;
  int max_outer = 100;
};

SchemeResult run_pipeline(const Topology& topo, const ChannelRealization& ch,
                          const SystemConfig& cfg, const FairnessWeights& weights,
                          const PipelineOptions& popts) {
  auto t0 = Clock::now();
  SchemeResult out;
  out.alloc = Allocation(cfg);
  double best_obj = utility(out.alloc, cfg, weights);

  PowerMatrix power = PowerMatrix::equal_split(cfg);
  Allocation reference(cfg);
  SchedOptions sopts;
  sopts.allow_m2m = popts.allow_m2m;
  sopts.allow_unlicensed = popts.allow_unlicensed;
  sopts.node_limit = 1500;  // practical search budget per subframe program

  const int cap = std::min(popts.max_outer, 100);
  for (int l = 1; l <= cap; ++l) {
    out.trace.iterations = l;
    AssocSchedOutcome assoc =
        solve_association_scheduling(ch, power, cfg, topo, reference, weights, sopts);
    Allocation cand = assoc.alloc;
    power_phase(cand, ch, cfg, topo, weights, out.trace, l);

    double obj = utility(cand, cfg, weights);
    double delta;
    if (obj <= best_obj + 1e-12) {
      delta = best_obj - obj;
      best_obj = obj;
      out.alloc = cand;
    } else {
      delta = 0.0;  // candidate rejected; the accepted state repeats
    }

    bool feasible = check_feasibility(out.alloc, ch, cfg, topo).empty();
    out.trace.rows.push_back({l, best_obj, weighted_scheduled(out.alloc, weights),
                              out.alloc.total_power(), feasible, ms_since(t0)});

    // Scheduled links carry their optimized power forward; everything else
    // returns to the equal split.
    power = PowerMatrix::equal_split(cfg);
    for (int t = 0; t < cfg.cycle_len; ++t) {
      for (int n = 0; n < cfg.num_cus; ++n)
        for (int k = 0; k < cfg.num_licensed; ++k)
          if (out.alloc.phi(n, k, t)) power.cu(n, k, t) = out.alloc.p_cu(n, k, t);
      for (int m = 0; m < cfg.num_iot; ++m) {
        for (int a = 0; a <= cfg.num_idle_cus; ++a)
          for (int k = 0; k < cfg.num_licensed; ++k)
            if (out.alloc.theta(m, a, k, t)) power.iot(m, a, k, t) = out.alloc.p_iot(m, a, k, t);
        for (int q = 0; q < cfg.num_idle_cus; ++q)
          for (int k = 0; k < cfg.num_unlicensed_sub; ++k)
            if (out.alloc.beta(m, q, k, t))
              power.iot_u(m, q, k, t) = out.alloc.p_iot_u(m, q, k, t);
      }
    }
    reference = out.alloc;

    if (delta <= cfg.convergence_tol) {
      out.trace.converged = true;
      break;
    }
  }
  out.trace.hit_iteration_cap = !out.trace.converged && out.trace.iterations >= cap;
  out.trace.wallclock_ms = ms_since(t0);
  return out;
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Tc: return "tc";
    case Scheme::Iotl: return "iotl";
    case Scheme::Daspa: return "daspa";
    case Scheme::Maspa: return "maspa";
    case Scheme::Iaspa: return "iaspa";
  }
  return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
  for (Scheme s : {Scheme::Tc, Scheme::Iotl, Scheme::Daspa, Scheme::Maspa, Scheme::Iaspa})
    if (name == scheme_name(s)) return s;
  return std::nullopt;
}

SchemeResult run_iaspa(const Topology& topo, const ChannelRealization& ch,
                       const SystemConfig& cfg, const FairnessWeights& weights) {
  return run_pipeline(topo, ch, cfg, weights, {true, true, 100});
}

SchemeResult run_tc(const Topology& topo, const ChannelRealization& ch, const SystemConfig& cfg,
                    const FairnessWeights& weights) {
  return run_pipeline(topo, ch, cfg, weights, {false, false, 100});
}

SchemeResult run_iotl(const Topology& topo, const ChannelRealization& ch, const SystemConfig& cfg,
                      const FairnessWeights& weights) {
  return run_pipeline(topo, ch, cfg, weights, {true, false, 100});
}

SchemeResult run_daspa(const Topology& topo, const ChannelRealization& ch,
                       const SystemConfig& cfg, const FairnessWeights& weights) {
  return run_pipeline(topo, ch, cfg, weights, {true, true, 1});
}

std::vector<int> maspa_match(const Topology& topo, const ChannelRealization& ch,
                             const SystemConfig& cfg) {
  const int M = cfg.num_iot, Q = cfg.num_idle_cus;
  const int K = cfg.num_licensed, T = cfg.cycle_len;

  // Mean licensed gain toward each receiver (0 = BS, q+1 = idle slot q).
  auto mean_gain = [&](int m, int recv) {
    double s = 0.0;
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t)
        s += recv == 0 ? ch.iot_bs(m, k, t) : ch.iot_cu(m, recv - 1, k, t);
    return s / (K * T);
  };

  std::vector<std::vector<int>> pref(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m) {
    std::vector<std::pair<double, int>> ranked;
    for (int r = 0; r <= Q; ++r) ranked.push_back({mean_gain(m, r), r});
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (auto& [g, r] : ranked) pref[static_cast<size_t>(m)].push_back(r);
  }

  std::vector<int> match(static_cast<size_t>(M), -1);
  std::vector<int> holder(static_cast<size_t>(Q), -1);  // device held by each idle slot
  std::vector<size_t> next(static_cast<size_t>(M), 0);
  std::vector<int> free;
  for (int m = M - 1; m >= 0; --m) free.push_back(m);
  while (!free.empty()) {
    int m = free.back();
    free.pop_back();
    if (next[static_cast<size_t>(m)] >= pref[static_cast<size_t>(m)].size()) continue;
    int r = pref[static_cast<size_t>(m)][next[static_cast<size_t>(m)]++];
    if (r == 0) {
      match[static_cast<size_t>(m)] = 0;  // the BS accepts everyone
      continue;
    }
    int q = r - 1;
    int held = holder[static_cast<size_t>(q)];
    if (held < 0) {
      holder[static_cast<size_t>(q)] = m;
      match[static_cast<size_t>(m)] = r;
    } else if (mean_gain(m, r) > mean_gain(held, r)) {
      holder[static_cast<size_t>(q)] = m;
      match[static_cast<size_t>(m)] = r;
      match[static_cast<size_t>(held)] = -1;
      free.push_back(held);
    } else {
      free.push_back(m);
    }
  }
  for (int m = 0; m < M; ++m)
    if (match[static_cast<size_t>(m)] < 0) match[static_cast<size_t>(m)] = 0;
  return match;
}

SchemeResult run_maspa(const Topology& topo, const ChannelRealization& ch,
                       const SystemConfig& cfg, const FairnessWeights& weights) {
  auto t0 = Clock::now();
  SchemeResult out;
  out.trace.reinterpreted = true;
  out.alloc = Allocation(cfg);
  Allocation& al = out.alloc;
  const int M = cfg.num_iot, N = cfg.num_cus, Q = cfg.num_idle_cus;
  const int K = cfg.num_licensed, Ku = cfg.num_unlicensed_sub, T = cfg.cycle_len;
  PowerMatrix power = PowerMatrix::equal_split(cfg);

  std::vector<int> match = maspa_match(topo, ch, cfg);

  // Active CUs hold one exclusive licensed subchannel in every subframe.
  std::vector<std::vector<uint8_t>> k_taken(static_cast<size_t>(T),
                                            std::vector<uint8_t>(static_cast<size_t>(K), 0));
  int next_k = 0;
  for (int n = 0; n < N && next_k < K; ++n) {
    if (topo.is_idle_cu(n)) continue;
    for (int t = 0; t < T; ++t) {
      al.phi(n, next_k, t) = 1;
      al.p_cu(n, next_k, t) = power.cu(n, next_k, t);
      k_taken[static_cast<size_t>(t)][static_cast<size_t>(next_k)] = 1;
    }
    ++next_k;
  }

  // Devices in descending gain order pick the earliest subframe with room.
  std::vector<int> order(static_cast<size_t>(M));
  for (int m = 0; m < M; ++m) order[static_cast<size_t>(m)] = m;
  auto gain_to = [&](int m) {
    int r = match[static_cast<size_t>(m)];
    double s = 0.0;
    for (int k = 0; k < K; ++k)
      for (int t = 0; t < T; ++t) s += r == 0 ? ch.iot_bs(m, k, t) : ch.iot_cu(m, r - 1, k, t);
    return s;
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ga = gain_to(a), gb = gain_to(b);
    if (ga != gb) return ga > gb;
    return a < b;
  });

  std::vector<int> uplink_k(static_cast<size_t>(std::max(Q, 1)) * T, -1);
  std::vector<int> cluster_load(static_cast<size_t>(std::max(Q, 1)) * T, 0);
  auto uk = [&](int q, int t) -> int& { return uplink_k[static_cast<size_t>(q) * T + t]; };
  auto load = [&](int q, int t) -> int& { return cluster_load[static_cast<size_t>(q) * T + t]; };

  for (int m : order) {
    int r = match[static_cast<size_t>(m)];
    for (int t = 0; t < T; ++t) {
      auto& taken = k_taken[static_cast<size_t>(t)];
      if (r == 0) {
        int k = -1;
        for (int kk = 0; kk < K; ++kk)
          if (!taken[static_cast<size_t>(kk)]) {
            k = kk;
            break;
          }
        if (k < 0) continue;
        taken[static_cast<size_t>(k)] = 1;
        al.sched(m, t) = 1;
        al.assoc(m, 0, t) = 1;
        al.theta(m, 0, k, t) = 1;
        al.p_iot(m, 0, k, t) = power.iot(m, 0, k, t);
        break;
      }
      int q = r - 1;
      if (uk(q, t) < 0) {
        int k = -1;
        for (int kk = 0; kk < K; ++kk)
          if (!taken[static_cast<size_t>(kk)]) {
            k = kk;
            break;
          }
        if (k < 0) continue;
        uk(q, t) = k;
        taken[static_cast<size_t>(k)] = 1;
      }
      if (load(q, t) >= K - 1) continue;  // anchors exhausted
      // Anchor: the next licensed subchannel distinct from the uplink and
      // from the cluster's other anchors (underlaying other cells is fine).
      int anchor = -1;
      for (int kk = 0; kk < K; ++kk) {
        if (kk == uk(q, t)) continue;
        bool used_here = false;
        for (int m2 = 0; m2 < M; ++m2) used_here |= al.theta(m2, q + 1, kk, t) != 0;
        if (!used_here) {
          anchor = kk;
          break;
        }
      }
      if (anchor < 0) continue;
      int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
      al.phi(cu, uk(q, t), t) = 1;
      al.p_cu(cu, uk(q, t), t) = power.cu(cu, uk(q, t), t);
      al.sched(m, t) = 1;
      al.assoc(m, r, t) = 1;
      al.theta(m, q + 1, anchor, t) = 1;
      al.p_iot(m, q + 1, anchor, t) = power.iot(m, q + 1, anchor, t);
      if (t < cfg.on_len && Ku > 0) {
        // First free unlicensed subchannel of the cluster, one per device.
        for (int kk = 0; kk < Ku; ++kk) {
          bool used_here = false;
          for (int m2 = 0; m2 < M; ++m2) used_here |= al.beta(m2, q, kk, t) != 0;
          if (used_here) continue;
          al.beta(m, q, kk, t) = 1;
          al.p_iot_u(m, q, kk, t) = power.iot_u(m, q, kk, t);
          break;
        }
      }
      ++load(q, t);
      break;
    }
  }

  power_phase(al, ch, cfg, topo, weights, out.trace, 1);
  out.trace.iterations = 1;
  out.trace.converged = true;
  bool feasible = check_feasibility(al, ch, cfg, topo).empty();
  out.trace.rows.push_back({1, utility(al, cfg, weights), weighted_scheduled(al, weights),
                            al.total_power(), feasible, ms_since(t0)});
  out.trace.wallclock_ms = ms_since(t0);
  return out;
}

SchemeResult run_scheme(Scheme s, const Topology& topo, const ChannelRealization& ch,
                        const SystemConfig& cfg, const FairnessWeights& weights) {
  switch (s) {
    case Scheme::Tc: return run_tc(topo, ch, cfg, weights);
    case Scheme::Iotl: return run_iotl(topo, ch, cfg, weights);
    case Scheme::Daspa: return run_daspa(topo, ch, cfg, weights);
    case Scheme::Maspa: return run_maspa(topo, ch, cfg, weights);
    case Scheme::Iaspa: return run_iaspa(topo, ch, cfg, weights);
  }
  return run_iaspa(topo, ch, cfg, weights);
}

}  // namespace iotu
