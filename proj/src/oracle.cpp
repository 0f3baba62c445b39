// SPDX-License-Identifier: Apache-2.0
#include "iotu/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "iotu/link_model.hpp"
#include "iotu/power_alloc.hpp"

namespace iotu {

std::vector<double> power_grid(double cap, int levels) {
  std::vector<double> grid;
  if (levels <= 1) {
    grid.push_back(cap);
    return grid;
  }
  double lo = kPowerFloor;
  for (int i = 0; i < levels; ++i)
    grid.push_back(lo * std::pow(cap / lo, static_cast<double>(i) / (levels - 1)));
  return grid;
}

int64_t oracle_variable_count(const SystemConfig& cfg) {
  int64_t phi = static_cast<int64_t>(cfg.num_cus) * cfg.num_licensed * cfg.cycle_len;
  int64_t theta = static_cast<int64_t>(cfg.num_iot) * (cfg.num_idle_cus + 1) *
                  cfg.num_licensed * cfg.cycle_len;
  int64_t beta = static_cast<int64_t>(cfg.num_iot) * cfg.num_idle_cus * cfg.num_unlicensed_sub *
                 cfg.on_len;
  return phi + theta + beta;
}

namespace {

// Assignment of one device for the cycle: subframe and association, or none.
struct DeviceChoice {
  int t = -1;  // -1: unscheduled
  int a = -1;  // 0 = BS, q+1 = idle slot q
};

// One solved subframe slice: minimum gridded power and the link layout
// that attains it.
struct SliceSolution {
  bool feasible = false;
  double power = 0.0;
  // (is_cu, node, a, k, unlicensed, p)
  std::vector<std::tuple<bool, int, int, int, bool, double>> links;
};

struct SliceEnumerator {
  const ChannelRealization& ch;
  const SystemConfig& cfg;
  const Topology& topo;
  const std::vector<double>& iot_grid;
  const std::vector<double>& cu_grid;
  int t;
  std::vector<std::pair<int, int>> devices;  // (m, a) scheduled in this subframe

  Allocation al;
  SliceSolution best;

  SliceEnumerator(const ChannelRealization& ch_, const SystemConfig& cfg_, const Topology& topo_,
                  const std::vector<double>& ig, const std::vector<double>& cg, int t_,
                  std::vector<std::pair<int, int>> devs)
      : ch(ch_), cfg(cfg_), topo(topo_), iot_grid(ig), cu_grid(cg), t(t_),
        devices(std::move(devs)), al(cfg_) {
    for (auto [m, a] : devices) {
      al.sched(m, t) = 1;
      al.assoc(m, a, t) = 1;
    }
  }

  // Structural pre-checks that do not need rates.
  bool structure_ok() const {
    for (int k = 0; k < cfg.num_licensed; ++k) {
      int cell = 0;
      for (int n = 0; n < cfg.num_cus; ++n) cell += al.phi(n, k, t) ? 1 : 0;
      for (int m = 0; m < cfg.num_iot; ++m) cell += al.theta(m, 0, k, t) ? 1 : 0;
      if (cell > 1) return false;
      for (int q = 0; q < cfg.num_idle_cus; ++q) {
        int relay = al.phi(topo.idle_cu_ids[static_cast<size_t>(q)], k, t) ? 1 : 0;
        for (int m = 0; m < cfg.num_iot; ++m) relay += al.theta(m, q + 1, k, t) ? 1 : 0;
        if (relay > 1) return false;
      }
    }
    for (int q = 0; q < cfg.num_idle_cus; ++q)
      for (int k = 0; k < cfg.num_unlicensed_sub; ++k) {
        int users = 0;
        for (int m = 0; m < cfg.num_iot; ++m) users += al.beta(m, q, k, t) ? 1 : 0;
        if (users > 1) return false;
      }
    return true;
  }

  bool rates_ok() {
    SubframeRates r = compute_rates(al, ch, cfg, topo, t);
    for (auto [m, a] : devices) {
      double d = cfg.traffic[static_cast<size_t>(m)];
      double tol = 1e-9 * std::max(1.0, d);
      if (a == 0) {
        if (r.direct_sum(m) < d - tol) return false;
      } else {
        double got = 0.0;
        for (int q = 0; q < cfg.num_idle_cus; ++q) {
          for (int k = 0; k < cfg.num_licensed; ++k) got += r.m2m(m, q, k);
          if (t < cfg.on_len)
            for (int k = 0; k < cfg.num_unlicensed_sub; ++k) got += r.m2m_u(m, q, k);
        }
        if (got < d - tol) return false;
      }
    }
    for (int q = 0; q < cfg.num_idle_cus; ++q) {
      double agg = 0.0;
      for (int m = 0; m < cfg.num_iot; ++m) {
        for (int k = 0; k < cfg.num_licensed; ++k) agg += r.m2m(m, q, k);
        if (t < cfg.on_len)
          for (int k = 0; k < cfg.num_unlicensed_sub; ++k) agg += r.m2m_u(m, q, k);
      }
      int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
      if (agg > 0.0 && r.cellular_sum(cu) < agg - 1e-9 * std::max(1.0, agg)) return false;
    }
    for (int n = 0; n < cfg.num_cus; ++n) {
      if (topo.is_idle_cu(n)) continue;
      bool live = false;
      for (int k = 0; k < cfg.num_licensed; ++k) live |= al.phi(n, k, t) != 0;
      if (live && r.cellular_sum(n) < cfg.rate_min - 1e-9) return false;
    }
    return true;
  }

  double slice_power() const {
    double s = 0.0;
    for (int n = 0; n < cfg.num_cus; ++n)
      for (int k = 0; k < cfg.num_licensed; ++k) s += al.p_cu(n, k, t);
    for (int m = 0; m < cfg.num_iot; ++m) {
      for (int a = 0; a <= cfg.num_idle_cus; ++a)
        for (int k = 0; k < cfg.num_licensed; ++k) s += al.p_iot(m, a, k, t);
      for (int q = 0; q < cfg.num_idle_cus; ++q)
        for (int k = 0; k < cfg.num_unlicensed_sub; ++k) s += al.p_iot_u(m, q, k, t);
    }
    return s;
  }

  void harvest() {
    if (!structure_ok()) return;
    double power = slice_power();
    if (best.feasible && power >= best.power) return;  // cannot improve
    if (!rates_ok()) return;
    best.feasible = true;
    best.power = power;
    best.links.clear();
    for (int n = 0; n < cfg.num_cus; ++n)
      for (int k = 0; k < cfg.num_licensed; ++k)
        if (al.phi(n, k, t))
          best.links.push_back({true, n, -1, k, false, al.p_cu(n, k, t)});
    for (int m = 0; m < cfg.num_iot; ++m) {
      for (int a = 0; a <= cfg.num_idle_cus; ++a)
        for (int k = 0; k < cfg.num_licensed; ++k)
          if (al.theta(m, a, k, t))
            best.links.push_back({false, m, a, k, false, al.p_iot(m, a, k, t)});
      for (int q = 0; q < cfg.num_idle_cus; ++q)
        for (int k = 0; k < cfg.num_unlicensed_sub; ++k)
          if (al.beta(m, q, k, t))
            best.links.push_back({false, m, q, k, true, al.p_iot_u(m, q, k, t)});
    }
  }

  // Enumerate power levels for device link sets, budget-pruned.
  void device_powers(size_t dev, size_t entry, std::vector<std::pair<int, int>>& lic,
                     std::vector<std::pair<int, int>>& unl, double used) {
    auto [m, a] = devices[dev];
    if (entry < lic.size()) {
      for (double p : iot_grid) {
        if (used + p > cfg.p_iot_max * (1 + 1e-12)) break;  // grid is ascending
        al.p_iot(m, a, lic[entry].second, t) = p;
        device_powers(dev, entry + 1, lic, unl, used + p);
      }
      al.p_iot(m, a, lic[entry].second, t) = 0.0;
      return;
    }
    size_t u = entry - lic.size();
    if (u < unl.size()) {
      for (double p : iot_grid) {
        if (used + p > cfg.p_iot_max * (1 + 1e-12)) break;
        al.p_iot_u(m, unl[u].first, unl[u].second, t) = p;
        device_powers(dev, entry + 1, lic, unl, used + p);
      }
      al.p_iot_u(m, unl[u].first, unl[u].second, t) = 0.0;
      return;
    }
    enumerate_device(dev + 1);
  }

  // Enumerate licensed subsets (nonempty, anchoring the link) and unlicensed
  // subsets for one device, then recurse.
  void enumerate_device(size_t dev) {
    if (dev == devices.size()) {
      enumerate_cu(0);
      return;
    }
    auto [m, a] = devices[dev];
    const int K = cfg.num_licensed;
    const int Ku = (a >= 1 && t < cfg.on_len) ? cfg.num_unlicensed_sub : 0;
    for (uint32_t lic_mask = 1; lic_mask < (1u << K); ++lic_mask) {
      std::vector<std::pair<int, int>> lic;
      for (int k = 0; k < K; ++k)
        if (lic_mask & (1u << k)) {
          al.theta(m, a, k, t) = 1;
          lic.push_back({a, k});
        }
      for (uint32_t unl_mask = 0; unl_mask < (1u << Ku); ++unl_mask) {
        std::vector<std::pair<int, int>> unl;
        for (int k = 0; k < Ku; ++k)
          if (unl_mask & (1u << k)) {
            al.beta(m, a - 1, k, t) = 1;
            unl.push_back({a - 1, k});
          }
        device_powers(dev, 0, lic, unl, 0.0);
        for (int k = 0; k < Ku; ++k) al.beta(m, a - 1, k, t) = 0;
      }
      for (int k = 0; k < K; ++k) al.theta(m, a, k, t) = 0;
    }
  }

  void cu_powers(int n, int k, double used, uint32_t mask) {
    if (k == cfg.num_licensed) {
      enumerate_cu(n + 1);
      return;
    }
    if (!(mask & (1u << k))) {
      cu_powers(n, k + 1, used, mask);
      return;
    }
    for (double p : cu_grid) {
      if (used + p > cfg.p_cu_max * (1 + 1e-12)) break;
      al.p_cu(n, k, t) = p;
      cu_powers(n, k + 1, used + p, mask);
    }
    al.p_cu(n, k, t) = 0.0;
  }

  void enumerate_cu(int n) {
    if (n == cfg.num_cus) {
      harvest();
      return;
    }
    for (uint32_t mask = 0; mask < (1u << cfg.num_licensed); ++mask) {
      for (int k = 0; k < cfg.num_licensed; ++k) al.phi(n, k, t) = (mask >> k) & 1;
      cu_powers(n, 0, 0.0, mask);
      for (int k = 0; k < cfg.num_licensed; ++k) al.phi(n, k, t) = 0;
    }
  }

  SliceSolution run() {
    enumerate_device(0);
    return best;
  }
};

struct CycleEnumerator {
  const ChannelRealization& ch;
  const SystemConfig& cfg;
  const Topology& topo;
  std::vector<double> iot_grid, cu_grid;
  std::map<std::pair<int, std::vector<std::pair<int, int>>>, SliceSolution> memo;

  SliceSolution& slice(int t, std::vector<std::pair<int, int>> devs) {
    std::sort(devs.begin(), devs.end());
    auto key = std::make_pair(t, devs);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    SliceEnumerator e(ch, cfg, topo, iot_grid, cu_grid, t, key.second);
    return memo.emplace(key, e.run()).first->second;
  }
};

Allocation reconstruct(const SystemConfig& cfg, const std::vector<DeviceChoice>& choice,
                       CycleEnumerator& cyc) {
  Allocation al(cfg);
  for (int t = 0; t < cfg.cycle_len; ++t) {
    std::vector<std::pair<int, int>> devs;
    for (int m = 0; m < cfg.num_iot; ++m)
      if (choice[static_cast<size_t>(m)].t == t)
        devs.push_back({m, choice[static_cast<size_t>(m)].a});
    SliceSolution& sol = cyc.slice(t, devs);
    for (auto [m, a] : devs) {
      al.sched(m, t) = 1;
      al.assoc(m, a, t) = 1;
    }
    for (auto& [is_cu, node, a, k, unl, p] : sol.links) {
      if (is_cu) {
        al.phi(node, k, t) = 1;
        al.p_cu(node, k, t) = p;
      } else if (unl) {
        al.beta(node, a, k, t) = 1;
        al.p_iot_u(node, a, k, t) = p;
      } else {
        al.theta(node, a, k, t) = 1;
        al.p_iot(node, a, k, t) = p;
      }
    }
  }
  return al;
}

}  // namespace

BruteForceResult brute_force_p3(const ChannelRealization& ch, const SystemConfig& cfg,
                                const Topology& topo, const FairnessWeights& weights,
                                int power_levels) {
  int64_t count = oracle_variable_count(cfg);
  if (count > 24)
    throw std::domain_error("brute force size guard: " + std::to_string(count) +
                            " binary variables exceed 24");
  if (power_levels > 5 || power_levels < 1)
    throw std::domain_error("brute force size guard: power levels must be in [1, 5]");

  CycleEnumerator cyc{ch, cfg, topo, power_grid(cfg.p_iot_max, power_levels),
                      power_grid(cfg.p_cu_max, power_levels), {}};

  const int M = cfg.num_iot, T = cfg.cycle_len, Q = cfg.num_idle_cus;
  const int options = 1 + T * (Q + 1);
  std::vector<DeviceChoice> choice(static_cast<size_t>(M));
  BruteForceResult best;
  best.best_utility = std::numeric_limits<double>::infinity();
  std::vector<DeviceChoice> best_choice;

  int64_t combos = 1;
  for (int m = 0; m < M; ++m) combos *= options;
  for (int64_t code = 0; code < combos; ++code) {
    int64_t rest = code;
    for (int m = 0; m < M; ++m) {
      int opt = static_cast<int>(rest % options);
      rest /= options;
      if (opt == 0)
        choice[static_cast<size_t>(m)] = {-1, -1};
      else
        choice[static_cast<size_t>(m)] = {(opt - 1) % T, (opt - 1) / T};
    }
    double scheduled = 0.0;
    double total_power = 0.0;
    bool ok = true;
    for (int t = 0; t < T && ok; ++t) {
      std::vector<std::pair<int, int>> devs;
      for (int m = 0; m < M; ++m)
        if (choice[static_cast<size_t>(m)].t == t)
          devs.push_back({m, choice[static_cast<size_t>(m)].a});
      SliceSolution& sol = cyc.slice(t, devs);
      if (!sol.feasible) {
        ok = false;
        break;
      }
      total_power += sol.power;
    }
    if (!ok) continue;
    for (int m = 0; m < M; ++m)
      if (choice[static_cast<size_t>(m)].t >= 0)
        scheduled += weights.lambda[static_cast<size_t>(m)];
    double u = cfg.epsilon * total_power +
               (1.0 - cfg.epsilon) * (T * weights.lambda_sum() - scheduled);
    if (u < best.best_utility - 1e-15) {
      best.best_utility = u;
      best.best_weighted = scheduled;
      best.best_power = total_power;
      best_choice = choice;
    }
  }
  best.argmin = reconstruct(cfg, best_choice, cyc);
  return best;
}

Theorem1Result verify_theorem1(const ChannelRealization& ch, const SystemConfig& cfg,
                               const Topology& topo, const FairnessWeights& weights,
                               int power_levels) {
  int64_t count = oracle_variable_count(cfg);
  if (count > 24)
    throw std::domain_error("brute force size guard: " + std::to_string(count) +
                            " binary variables exceed 24");

  BruteForceResult p3 = brute_force_p3(ch, cfg, topo, weights, power_levels);

  // Sequential route on the same grid: maximize the weighted count, then
  // minimize power within the optimal set.
  CycleEnumerator cyc{ch, cfg, topo, power_grid(cfg.p_iot_max, power_levels),
                      power_grid(cfg.p_cu_max, power_levels), {}};
  const int M = cfg.num_iot, T = cfg.cycle_len, Q = cfg.num_idle_cus;
  const int options = 1 + T * (Q + 1);
  std::vector<DeviceChoice> choice(static_cast<size_t>(M));
  double best_weighted = -1.0;
  double best_power = std::numeric_limits<double>::infinity();

  int64_t combos = 1;
  for (int m = 0; m < M; ++m) combos *= options;
  for (int64_t code = 0; code < combos; ++code) {
    int64_t rest = code;
    for (int m = 0; m < M; ++m) {
      int opt = static_cast<int>(rest % options);
      rest /= options;
      if (opt == 0)
        choice[static_cast<size_t>(m)] = {-1, -1};
      else
        choice[static_cast<size_t>(m)] = {(opt - 1) % T, (opt - 1) / T};
    }
    double scheduled = 0.0;
    double total_power = 0.0;
    bool ok = true;
    for (int t = 0; t < T && ok; ++t) {
      std::vector<std::pair<int, int>> devs;
      for (int m = 0; m < M; ++m)
        if (choice[static_cast<size_t>(m)].t == t)
          devs.push_back({m, choice[static_cast<size_t>(m)].a});
      SliceSolution& sol = cyc.slice(t, devs);
      if (!sol.feasible) ok = false;
      else total_power += sol.power;
    }
    if (!ok) continue;
    for (int m = 0; m < M; ++m)
      if (choice[static_cast<size_t>(m)].t >= 0)
        scheduled += weights.lambda[static_cast<size_t>(m)];
    if (scheduled > best_weighted + 1e-12) {
      best_weighted = scheduled;
      best_power = total_power;
    } else if (std::abs(scheduled - best_weighted) <= 1e-12) {
      best_power = std::min(best_power, total_power);
    }
  }

  Theorem1Result res;
  res.p3_weighted = p3.best_weighted;
  res.p3_power = p3.best_power;
  res.p12_weighted = best_weighted;
  res.p12_power = best_power;
  res.equivalent = std::abs(res.p3_weighted - res.p12_weighted) <= 1e-9 &&
                   std::abs(res.p3_power - res.p12_power) <= 1e-12 * std::max(1.0, res.p12_power);
  return res;
}

}  // namespace iotu
