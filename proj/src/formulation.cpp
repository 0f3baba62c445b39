// SPDX-License-Identifier: Apache-2.0
#include "iotu/formulation.hpp"

#include <cmath>
#include <ostream>

namespace iotu {

namespace {
constexpr double kRateTol = 1e-9;
constexpr double kPowerTol = 1e-9;

double rate_tol(double rhs) { return kRateTol * std::max(1.0, std::abs(rhs)); }
}  // namespace

const char* constraint_name(ConstraintId id) {
  switch (id) {
    case ConstraintId::PowerBudgetIot: return "power_budget_iot";
    case ConstraintId::PowerBudgetCu: return "power_budget_cu";
    case ConstraintId::RelaySubchannelConflict: return "relay_subchannel_conflict";
    case ConstraintId::UnlicensedSubchannelConflict: return "unlicensed_subchannel_conflict";
    case ConstraintId::CellularSubchannelConflict: return "cellular_subchannel_conflict";
    case ConstraintId::AnchorMissing: return "anchor_missing";
    case ConstraintId::ScheduleOnce: return "schedule_once";
    case ConstraintId::SingleAssociation: return "single_association";
    case ConstraintId::SchedAssocCoupling: return "sched_assoc_coupling";
    case ConstraintId::AssocSubchannelCoupling: return "assoc_subchannel_coupling";
    case ConstraintId::RateCellularMode: return "rate_cellular_mode";
    case ConstraintId::RateAggregationMode: return "rate_aggregation_mode";
    case ConstraintId::CuCoverage: return "cu_coverage";
    case ConstraintId::CuQos: return "cu_qos";
    case ConstraintId::UnlicensedOffWindow: return "unlicensed_off_window";
    case ConstraintId::PowerGating: return "power_gating";
  }
  return "unknown";
}

ViolationReport check_feasibility(const Allocation& al, const ChannelRealization& ch,
                                  const SystemConfig& cfg, const Topology& topo) {
  if (al.M != cfg.num_iot || al.N != cfg.num_cus || al.Q != cfg.num_idle_cus ||
      al.K != cfg.num_licensed || al.Ku != cfg.num_unlicensed_sub || al.T != cfg.cycle_len)
    throw std::invalid_argument("check_feasibility: allocation dimensions do not match config");
  if (ch.cu_bs.dim0() != al.N || ch.iot_bs.dim0() != al.M)
    throw std::invalid_argument("check_feasibility: channel dimensions do not match config");

  ViolationReport rep;
  const int M = al.M, N = al.N, Q = al.Q, K = al.K, Ku = al.Ku, T = al.T;

  // Power budgets and gating.
  for (int t = 0; t < T; ++t) {
    for (int m = 0; m < M; ++m) {
      double used = 0.0;
      for (int a = 0; a <= Q; ++a)
        for (int k = 0; k < K; ++k) {
          double p = al.p_iot(m, a, k, t);
          if (p < 0.0 || (p > 0.0 && !al.theta(m, a, k, t)))
            rep.push_back({ConstraintId::PowerGating, m, a, k, t});
          used += p;
        }
      for (int q = 0; q < Q; ++q)
        for (int k = 0; k < Ku; ++k) {
          double p = al.p_iot_u(m, q, k, t);
          if (p < 0.0 || (p > 0.0 && !al.beta(m, q, k, t)))
            rep.push_back({ConstraintId::PowerGating, m, q, k, t});
          used += p;
        }
      if (used > cfg.p_iot_max * (1.0 + kPowerTol))
        rep.push_back({ConstraintId::PowerBudgetIot, m, -1, -1, t});
    }
    for (int n = 0; n < N; ++n) {
      double used = 0.0;
      for (int k = 0; k < K; ++k) {
        double p = al.p_cu(n, k, t);
        if (p < 0.0 || (p > 0.0 && !al.phi(n, k, t)))
          rep.push_back({ConstraintId::PowerGating, -1, n, k, t});
        used += p;
      }
      if (used > cfg.p_cu_max * (1.0 + kPowerTol))
        rep.push_back({ConstraintId::PowerBudgetCu, -1, n, -1, t});
    }
  }

  // Subchannel exclusivity.
  for (int t = 0; t < T; ++t) {
    for (int q = 0; q < Q; ++q) {
      const int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
      for (int k = 0; k < K; ++k) {
        int load = al.phi(cu, k, t) ? 1 : 0;
        for (int m = 0; m < M; ++m) load += al.theta(m, q + 1, k, t) ? 1 : 0;
        if (load > 1) rep.push_back({ConstraintId::RelaySubchannelConflict, -1, cu, k, t});
      }
      for (int k = 0; k < Ku; ++k) {
        int load = 0;
        for (int m = 0; m < M; ++m) load += al.beta(m, q, k, t) ? 1 : 0;
        if (load > 1) rep.push_back({ConstraintId::UnlicensedSubchannelConflict, -1, cu, k, t});
      }
    }
    for (int k = 0; k < K; ++k) {
      int load = 0;
      for (int n = 0; n < N; ++n) load += al.phi(n, k, t) ? 1 : 0;
      for (int m = 0; m < M; ++m) load += al.theta(m, 0, k, t) ? 1 : 0;
      if (load > 1) rep.push_back({ConstraintId::CellularSubchannelConflict, -1, -1, k, t});
    }
  }

  // Scheduling, association, and logical couplings.
  for (int m = 0; m < M; ++m) {
    int times = 0;
    for (int t = 0; t < T; ++t) times += al.sched(m, t) ? 1 : 0;
    if (times > 1) rep.push_back({ConstraintId::ScheduleOnce, m, -1, -1, -1});
  }
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < M; ++m) {
      int fsum = 0;
      for (int a = 0; a <= Q; ++a) fsum += al.assoc(m, a, t) ? 1 : 0;
      if (fsum > (al.sched(m, t) ? 1 : 0))
        rep.push_back({ConstraintId::SingleAssociation, m, -1, -1, t});
      // 1 - c == prod_a (1 - f): c set iff some association exists.
      bool any_f = fsum > 0;
      if ((al.sched(m, t) != 0) != any_f)
        rep.push_back({ConstraintId::SchedAssocCoupling, m, -1, -1, t});
      for (int a = 0; a <= Q; ++a) {
        bool any_theta = false;
        for (int k = 0; k < K; ++k) any_theta |= al.theta(m, a, k, t) != 0;
        if ((al.assoc(m, a, t) != 0) != any_theta)
          rep.push_back({ConstraintId::AssocSubchannelCoupling, m, a, -1, t});
      }
    }

  // Unlicensed access only in the ON window, and only for scheduled links.
  for (int t = cfg.on_len; t < T; ++t)
    for (int m = 0; m < M; ++m)
      for (int q = 0; q < Q; ++q)
        for (int k = 0; k < Ku; ++k)
          if (al.beta(m, q, k, t))
            rep.push_back({ConstraintId::UnlicensedOffWindow, m, q, k, t});

  // Carrier-aggregation anchor for scheduled aggregation-mode devices.
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < M; ++m) {
      if (!al.sched(m, t)) continue;
      int a = al.association(m, t);
      if (a <= 0) continue;
      int anchors = 0;
      for (int k = 0; k < K; ++k) anchors += al.theta(m, a, k, t) ? 1 : 0;
      if (anchors < 1) rep.push_back({ConstraintId::AnchorMissing, m, a - 1, -1, t});
    }

  // Rate constraints with true rates at the stored powers.
  for (int t = 0; t < T; ++t) {
    SubframeRates r = compute_rates(al, ch, cfg, topo, t);
    for (int m = 0; m < M; ++m) {
      if (!al.sched(m, t)) continue;
      const double d = cfg.traffic[static_cast<size_t>(m)];
      int a = al.association(m, t);
      if (a == 0) {
        if (r.direct_sum(m) < d - rate_tol(d))
          rep.push_back({ConstraintId::RateCellularMode, m, -1, -1, t});
      } else if (a > 0) {
        double got = 0.0;
        for (int q = 0; q < Q; ++q) {
          for (int k = 0; k < K; ++k) got += r.m2m(m, q, k);
          if (t < cfg.on_len)
            for (int k = 0; k < Ku; ++k) got += r.m2m_u(m, q, k);
        }
        if (got < d - rate_tol(d))
          rep.push_back({ConstraintId::RateAggregationMode, m, a - 1, -1, t});
      }
    }
    for (int q = 0; q < Q; ++q) {
      const int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
      double aggregated = 0.0;
      for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) aggregated += r.m2m(m, q, k);
        if (t < cfg.on_len)
          for (int k = 0; k < Ku; ++k) aggregated += r.m2m_u(m, q, k);
      }
      if (aggregated > 0.0 && r.cellular_sum(cu) < aggregated - rate_tol(aggregated))
        rep.push_back({ConstraintId::CuCoverage, -1, cu, -1, t});
    }
    for (int n = 0; n < N; ++n) {
      if (topo.is_idle_cu(n)) continue;
      bool live = false;
      for (int k = 0; k < K; ++k) live |= al.phi(n, k, t) != 0;
      if (live && r.cellular_sum(n) < cfg.rate_min - rate_tol(cfg.rate_min))
        rep.push_back({ConstraintId::CuQos, -1, n, -1, t});
    }
  }
  return rep;
}

double utility(const Allocation& al, const SystemConfig& cfg, const FairnessWeights& w) {
  double unsched = 0.0;
  for (int m = 0; m < al.M; ++m) {
    int times = 0;
    for (int t = 0; t < al.T; ++t) times += al.sched(m, t) ? 1 : 0;
    unsched += w.lambda[static_cast<size_t>(m)] * static_cast<double>(al.T - times);
  }
  return cfg.epsilon * al.total_power() + (1.0 - cfg.epsilon) * unsched;
}

double weighted_scheduled(const Allocation& al, const FairnessWeights& w) {
  double s = 0.0;
  for (int m = 0; m < al.M; ++m)
    for (int t = 0; t < al.T; ++t)
      if (al.sched(m, t)) s += w.lambda[static_cast<size_t>(m)];
  return s;
}

int raw_scheduled(const Allocation& al) {
  int s = 0;
  for (int m = 0; m < al.M; ++m)
    for (int t = 0; t < al.T; ++t) s += al.sched(m, t) ? 1 : 0;
  return s;
}

double bs_association_share(const Allocation& al) {
  int sched = 0, at_bs = 0;
  for (int m = 0; m < al.M; ++m)
    for (int t = 0; t < al.T; ++t)
      if (al.sched(m, t)) {
        ++sched;
        if (al.assoc(m, 0, t)) ++at_bs;
      }
  return sched == 0 ? 0.0 : static_cast<double>(at_bs) / sched;
}

FairnessWeights fairness_weights(const std::vector<double>& avg_sched_count,
                                 const SystemConfig& cfg) {
  FairnessWeights fw;
  fw.rho = cfg.weight_scale;
  const size_t M = static_cast<size_t>(cfg.num_iot);
  fw.w.resize(M);
  fw.lambda.resize(M);
  for (size_t m = 0; m < M; ++m) {
    double avg = m < avg_sched_count.size() ? avg_sched_count[m] : 0.0;
    fw.w[m] = 1.0 / (1.0 + avg);
    fw.lambda[m] = std::max(1, static_cast<int>(std::lround(fw.rho * fw.w[m])));
  }
  return fw;
}

void violations_to_csv(const ViolationReport& report, std::ostream& os) {
  os << "constraint_id,m,n,k,t\n";
  for (const Violation& v : report)
    os << constraint_name(v.id) << ',' << v.m << ',' << v.n << ',' << v.k << ',' << v.t << '\n';
}

}  // namespace iotu
