// SPDX-License-Identifier: Apache-2.0
#include "iotu/power_alloc.hpp"

#include <algorithm>
#include <cmath>

namespace iotu {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kJacobiTol = 1e-6;
constexpr int kJacobiCap = 80;
constexpr double kStationTol = 1e-6;
constexpr int kDescentCap = 600;
constexpr double kInnerMultTol = 1e-4;
constexpr int kInnerCap = 500;
constexpr double kOuterMoveTol = 1e-4;
constexpr int kOuterCap = 30;
constexpr double kRowSafety = 1e-11;  // feasibility slack kept by the polish
}  // namespace

ScaCoefficients sca_coefficients(double gamma_ref) {
  if (!(gamma_ref > 0.0))
    throw std::domain_error("sca_coefficients: reference SINR must be positive");
  ScaCoefficients c;
  c.d = gamma_ref / (1.0 + gamma_ref);
  c.e = std::log2(1.0 + gamma_ref) - c.d * std::log2(gamma_ref);
  return c;
}

Sp6Program build_sp6(const Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                     const Topology& topo, int t) {
  Sp6Program prog;
  const int M = al.M, N = al.N, Q = al.Q, K = al.K, Ku = al.Ku;
  const bool on = t < cfg.on_len;

  std::vector<int> device_group(static_cast<size_t>(std::max(M, 1)), -1);
  std::vector<int> cu_group(static_cast<size_t>(std::max(N, 1)), -1);
  auto budget_of = [&](bool device, int node) {
    auto& slot =
        device ? device_group[static_cast<size_t>(node)] : cu_group[static_cast<size_t>(node)];
    if (slot < 0) {
      slot = static_cast<int>(prog.budgets_.size());
      prog.budgets_.push_back({device, node, device ? cfg.p_iot_max : cfg.p_cu_max, {}});
    }
    return slot;
  };
  auto add_var = [&](PowerVar::Kind kind, int node, int a, int k, double gain, bool device) {
    int g = budget_of(device, node);
    prog.vars_.push_back({kind, node, a, k, gain, device ? cfg.p_iot_max : cfg.p_cu_max, g});
    prog.budgets_[static_cast<size_t>(g)].vars.push_back(prog.num_vars() - 1);
    return prog.num_vars() - 1;
  };

  Tensor3<int> cu_var(N, K, 1, -1);
  Tensor4<int> lic_var(M, Q + 1, K, 1, -1);
  Tensor4<int> unl_var(std::max(M, 1), std::max(Q, 1), std::max(Ku, 1), 1, -1);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < K; ++k)
      if (al.phi(n, k, t))
        cu_var(n, k, 0) = add_var(PowerVar::Kind::Cu, n, -1, k, ch.cu_bs(n, k, t), false);
  for (int m = 0; m < M; ++m)
    for (int a = 0; a <= Q; ++a)
      for (int k = 0; k < K; ++k)
        if (al.theta(m, a, k, t))
          lic_var(m, a, k, 0) =
              add_var(PowerVar::Kind::IotLicensed, m, a, k,
                      a == 0 ? ch.iot_bs(m, k, t) : ch.iot_cu(m, a - 1, k, t), true);
  if (on)
    for (int m = 0; m < M; ++m)
      for (int q = 0; q < Q; ++q)
        for (int k = 0; k < Ku; ++k)
          if (al.beta(m, q, k, t))
            unl_var(m, q, k, 0) =
                add_var(PowerVar::Kind::IotUnlicensed, m, q, k, ch.iot_cu_u(m, q, k, t), true);

  // One SINR expression per variable; coverage rows later reference frozen
  // clones so their subtracted side stays affine in log-power.
  prog.exprs_.resize(static_cast<size_t>(prog.num_vars()));
  for (int v = 0; v < prog.num_vars(); ++v) {
    const PowerVar& pv = prog.vars_[static_cast<size_t>(v)];
    SinrTerm& e = prog.exprs_[static_cast<size_t>(v)];
    e.var = v;
    e.base = cfg.noise_power;
    if (pv.kind == PowerVar::Kind::Cu || (pv.kind == PowerVar::Kind::IotLicensed && pv.a == 0)) {
      int own_slot = -1;
      if (pv.kind == PowerVar::Kind::Cu)
        for (int q = 0; q < Q; ++q)
          if (topo.idle_cu_ids[static_cast<size_t>(q)] == pv.node) own_slot = q;
      for (int m2 = 0; m2 < M; ++m2)
        for (int a2 = 1; a2 <= Q; ++a2) {
          if (pv.kind == PowerVar::Kind::IotLicensed && m2 == pv.node) continue;
          if (own_slot >= 0 && a2 == own_slot + 1) continue;
          int j = lic_var(m2, a2, pv.k, 0);
          if (j >= 0) e.interferers.push_back({j, ch.iot_bs(m2, pv.k, t)});
        }
    } else if (pv.kind == PowerVar::Kind::IotLicensed) {
      const int q = pv.a - 1;
      const int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
      for (int n2 = 0; n2 < N; ++n2) {
        if (n2 == cu) continue;
        int j = cu_var(n2, pv.k, 0);
        if (j >= 0) e.interferers.push_back({j, ch.cu_cu(n2, q, pv.k, t)});
      }
      for (int m2 = 0; m2 < M; ++m2)
        for (int a2 = 0; a2 <= Q; ++a2) {
          if (m2 == pv.node || a2 == pv.a) continue;
          int j = lic_var(m2, a2, pv.k, 0);
          if (j >= 0) e.interferers.push_back({j, ch.iot_cu(m2, q, pv.k, t)});
        }
    } else {
      const int q = pv.a;
      e.base += ch.wifi_interference(q, pv.k, t);
      for (int m2 = 0; m2 < M; ++m2)
        for (int q2 = 0; q2 < Q; ++q2) {
          if (m2 == pv.node || q2 == q) continue;
          int j = unl_var(m2, q2, pv.k, 0);
          if (j >= 0) e.interferers.push_back({j, ch.iot_cu_u(m2, q, pv.k, t)});
        }
    }
  }

  auto frozen_clone = [&](int var_id) {
    SinrTerm clone = prog.exprs_[static_cast<size_t>(var_id)];
    clone.frozen = true;
    prog.exprs_.push_back(std::move(clone));
    return static_cast<int>(prog.exprs_.size()) - 1;
  };

  for (int m = 0; m < M; ++m) {
    if (!al.sched(m, t)) continue;
    int a = al.association(m, t);
    RateRow row;
    row.owner = m;
    row.target = cfg.traffic[static_cast<size_t>(m)];
    if (a == 0) {
      row.type = RateRow::Type::DirectTraffic;
      for (int k = 0; k < K; ++k)
        if (lic_var(m, 0, k, 0) >= 0) row.lhs.push_back(lic_var(m, 0, k, 0));
    } else if (a > 0) {
      row.type = RateRow::Type::AggTraffic;
      for (int a2 = 1; a2 <= Q; ++a2)
        for (int k = 0; k < K; ++k)
          if (lic_var(m, a2, k, 0) >= 0) row.lhs.push_back(lic_var(m, a2, k, 0));
      if (on)
        for (int q = 0; q < Q; ++q)
          for (int k = 0; k < Ku; ++k)
            if (unl_var(m, q, k, 0) >= 0) row.lhs.push_back(unl_var(m, q, k, 0));
    } else {
      prog.structurally_infeasible_ = true;
      prog.orphan_devices_.push_back(m);
      continue;
    }
    if (row.lhs.empty()) {
      prog.structurally_infeasible_ = true;
      prog.orphan_devices_.push_back(m);
      continue;
    }
    prog.rows_.push_back(std::move(row));
  }
  for (int q = 0; q < Q; ++q) {
    const int cu = topo.idle_cu_ids[static_cast<size_t>(q)];
    RateRow row;
    row.type = RateRow::Type::Coverage;
    row.owner = q;
    row.target = 0.0;
    std::vector<int> cluster;
    for (int m = 0; m < M; ++m) {
      for (int k = 0; k < K; ++k)
        if (lic_var(m, q + 1, k, 0) >= 0) cluster.push_back(lic_var(m, q + 1, k, 0));
      if (on)
        for (int k = 0; k < Ku; ++k)
          if (unl_var(m, q, k, 0) >= 0) cluster.push_back(unl_var(m, q, k, 0));
    }
    if (cluster.empty()) continue;
    for (int id : cluster) row.rhs.push_back(frozen_clone(id));
    for (int k = 0; k < K; ++k)
      if (cu_var(cu, k, 0) >= 0) row.lhs.push_back(cu_var(cu, k, 0));
    prog.rows_.push_back(std::move(row));
  }
  for (int n = 0; n < N; ++n) {
    if (topo.is_idle_cu(n)) continue;
    RateRow row;
    row.type = RateRow::Type::Qos;
    row.owner = n;
    row.target = cfg.rate_min;
    for (int k = 0; k < K; ++k)
      if (cu_var(n, k, 0) >= 0) row.lhs.push_back(cu_var(n, k, 0));
    if (!row.lhs.empty()) prog.rows_.push_back(std::move(row));
  }
  return prog;
}

void Sp6Program::set_reference(const VectorXd& ref_power) {
  for (SinrTerm& e : exprs_) {
    double den = base_plus_interference(e, ref_power);
    double gamma = vars_[static_cast<size_t>(e.var)].gain * ref_power[e.var] / den;
    e.sca = sca_coefficients(std::max(gamma, kSinrRefFloor));
    if (!e.frozen) continue;
    e.frozen_w.clear();
    double adjusted = std::log(den);
    for (auto [j, g] : e.interferers) {
      double w = ref_power[j] * g / den;
      if (w > 1e-15) {
        e.frozen_w.push_back({j, w});
        adjusted -= w * std::log(ref_power[j]);
      }
    }
    e.frozen_log_den = adjusted;  // ln(den_ref) - sum w_j ln(p_ref_j)
  }
}

double Sp6Program::base_plus_interference(const SinrTerm& e, const VectorXd& p) {
  double den = e.base;
  for (auto [j, g] : e.interferers) den += p[j] * g;
  return den;
}

double Sp6Program::objective(const VectorXd& p, double epsilon) const {
  return epsilon * p.sum();
}

double Sp6Program::true_rate(int expr, const VectorXd& p) const {
  const SinrTerm& e = exprs_[static_cast<size_t>(expr)];
  double den = base_plus_interference(e, p);
  return std::log2(1.0 + vars_[static_cast<size_t>(e.var)].gain * p[e.var] / den);
}

double Sp6Program::true_row_surplus(const RateRow& row, const VectorXd& p) const {
  double s = -row.target;
  for (int id : row.lhs) s += true_rate(id, p);
  for (int id : row.rhs) s -= true_rate(id, p);
  return s;
}

double Sp6Program::sca_rate(int expr, const VectorXd& p) const {
  const SinrTerm& e = exprs_[static_cast<size_t>(expr)];
  double log_den;
  if (e.frozen) {
    log_den = e.frozen_log_den;
    for (auto [j, w] : e.frozen_w) log_den += w * std::log(p[j]);
  } else {
    log_den = std::log(base_plus_interference(e, p));
  }
  double log_gamma = std::log(p[e.var] * vars_[static_cast<size_t>(e.var)].gain) - log_den;
  return e.sca.d * (log_gamma / kLn2) + e.sca.e;
}

double Sp6Program::sca_row_surplus(const RateRow& row, const VectorXd& p) const {
  double s = -row.target;
  for (int id : row.lhs) s += sca_rate(id, p);
  for (int id : row.rhs) s -= sca_rate(id, p);
  return s;
}

double Sp6Program::row_constraint(const RateRow& row, const VectorXd& p_hat) const {
  VectorXd p = p_hat.array().exp();
  return -sca_row_surplus(row, p);
}

DualState DualState::zeros(const Sp6Program& prog) {
  DualState d;
  d.mu = VectorXd::Zero(static_cast<int>(prog.budgets().size()));
  int nu = 0, kappa = 0, xi = 0, chi = 0;
  for (const RateRow& r : prog.rows()) {
    switch (r.type) {
      case RateRow::Type::DirectTraffic: ++nu; break;
      case RateRow::Type::AggTraffic: ++kappa; break;
      case RateRow::Type::Coverage: ++xi; break;
      case RateRow::Type::Qos: ++chi; break;
    }
  }
  d.nu = VectorXd::Zero(nu);
  d.kappa = VectorXd::Zero(kappa);
  d.xi = VectorXd::Zero(xi);
  d.chi = VectorXd::Zero(chi);
  return d;
}

double DualState::max_abs_diff(const DualState& o) const {
  double m = 0.0;
  auto upd = [&m](const VectorXd& a, const VectorXd& b) {
    if (a.size()) m = std::max(m, (a - b).cwiseAbs().maxCoeff());
  };
  upd(mu, o.mu);
  upd(nu, o.nu);
  upd(kappa, o.kappa);
  upd(xi, o.xi);
  upd(chi, o.chi);
  return m;
}

namespace {

// Multiplier attached to each row, flattened in row order.
std::vector<double> row_multipliers(const Sp6Program& prog, const DualState& d) {
  std::vector<double> out;
  out.reserve(prog.rows().size());
  int nu = 0, kappa = 0, xi = 0, chi = 0;
  for (const RateRow& r : prog.rows()) {
    switch (r.type) {
      case RateRow::Type::DirectTraffic: out.push_back(d.nu[nu++]); break;
      case RateRow::Type::AggTraffic: out.push_back(d.kappa[kappa++]); break;
      case RateRow::Type::Coverage: out.push_back(d.xi[xi++]); break;
      case RateRow::Type::Qos: out.push_back(d.chi[chi++]); break;
    }
  }
  return out;
}

}  // namespace

double sp6_lagrangian(const Sp6Program& prog, const DualState& dual, const SystemConfig& cfg,
                      const VectorXd& p_hat) {
  VectorXd p = p_hat.array().exp();
  double L = cfg.epsilon * p.sum();
  const auto& budgets = prog.budgets();
  for (size_t b = 0; b < budgets.size(); ++b) {
    double used = 0.0;
    for (int v : budgets[b].vars) used += p[v];
    L += dual.mu[static_cast<int>(b)] * (used - budgets[b].cap);
  }
  std::vector<double> mult = row_multipliers(prog, dual);
  for (size_t r = 0; r < prog.rows().size(); ++r)
    L -= mult[r] * prog.sca_row_surplus(prog.rows()[r], p);
  return L;
}

VectorXd sp6_lagrangian_grad(const Sp6Program& prog, const DualState& dual,
                             const SystemConfig& cfg, const VectorXd& p_hat) {
  VectorXd p = p_hat.array().exp();
  const int n = prog.num_vars();
  VectorXd g = VectorXd::Zero(n);
  for (int v = 0; v < n; ++v)
    g[v] = (cfg.epsilon + dual.mu[prog.vars()[static_cast<size_t>(v)].budget_group]) * p[v];

  std::vector<double> mult = row_multipliers(prog, dual);
  for (size_t r = 0; r < prog.rows().size(); ++r) {
    if (mult[r] == 0.0) continue;
    const RateRow& row = prog.rows()[r];
    for (int side = 0; side < 2; ++side) {
      const std::vector<int>& ids = side == 0 ? row.lhs : row.rhs;
      double scale_sign = side == 0 ? -mult[r] : mult[r];  // L subtracts the surplus
      for (int id : ids) {
        const SinrTerm& e = prog.expr(id);
        double scale = scale_sign * e.sca.d / kLn2;
        g[e.var] += scale;
        if (e.frozen) {
          for (auto [j, w] : e.frozen_w) g[j] -= scale * w;
        } else {
          double den = Sp6Program::base_plus_interference(e, p);
          for (auto [j, gg] : e.interferers) g[j] -= scale * p[j] * gg / den;
        }
      }
    }
  }
  return g;
}

SlaveResult solve_slave(const DualState& dual, const Sp6Program& prog, const SystemConfig& cfg,
                        const VectorXd& start) {
  const int n = prog.num_vars();
  SlaveResult out;
  if (n == 0) return out;
  VectorXd p = start;
  for (int v = 0; v < n; ++v)
    p[v] = std::clamp(p[v], kPowerFloor, prog.vars()[static_cast<size_t>(v)].cap);

  std::vector<double> mult = row_multipliers(prog, dual);

  // p-independent closed-form pieces: own-rate weights plus frozen
  // interference corrections (both land in the numerator).
  VectorXd numerator0 = VectorXd::Zero(n);
  for (size_t r = 0; r < prog.rows().size(); ++r) {
    if (mult[r] == 0.0) continue;
    const RateRow& row = prog.rows()[r];
    for (int side = 0; side < 2; ++side) {
      const std::vector<int>& ids = side == 0 ? row.lhs : row.rhs;
      double sgn = side == 0 ? 1.0 : -1.0;
      for (int id : ids) {
        const SinrTerm& e = prog.expr(id);
        double w_own = sgn * mult[r] * e.sca.d / kLn2;
        numerator0[e.var] += w_own;
        if (e.frozen)
          for (auto [j, w] : e.frozen_w) numerator0[j] -= w_own * w;
      }
    }
  }

  // Jacobi sweeps of the closed forms; interference ratios refresh from the
  // current iterate.
  for (int sweep = 0; sweep < kJacobiCap; ++sweep) {
    VectorXd den_add = VectorXd::Zero(n);
    for (size_t r = 0; r < prog.rows().size(); ++r) {
      if (mult[r] == 0.0) continue;
      const RateRow& row = prog.rows()[r];
      for (int side = 0; side < 2; ++side) {
        const std::vector<int>& ids = side == 0 ? row.lhs : row.rhs;
        double sgn = side == 0 ? 1.0 : -1.0;
        for (int id : ids) {
          const SinrTerm& e = prog.expr(id);
          if (e.frozen) continue;
          double den = Sp6Program::base_plus_interference(e, p);
          for (auto [j, gg] : e.interferers)
            den_add[j] += sgn * mult[r] * e.sca.d / kLn2 * gg / den;
        }
      }
    }
    double move = 0.0;
    for (int v = 0; v < n; ++v) {
      double denominator =
          cfg.epsilon + dual.mu[prog.vars()[static_cast<size_t>(v)].budget_group] + den_add[v];
      double cap = prog.vars()[static_cast<size_t>(v)].cap;
      double value;
      if (numerator0[v] <= 0.0 || denominator <= 0.0)
        value = kPowerFloor;  // the objective drives the power down
      else
        value = std::clamp(numerator0[v] / denominator, kPowerFloor, cap);
      move = std::max(move, std::abs(value - p[v]) / std::max(p[v], kPowerFloor));
      p[v] = value;
    }
    if (move < kJacobiTol) break;
  }

  // Accept only stationary points of the Lagrangian; otherwise descend (the
  // frozen coverage side keeps the Lagrangian convex in log-power).
  VectorXd p_hat = p.array().log();
  auto proj_grad_norm = [&](const VectorXd& ph, const VectorXd& grad) {
    double m = 0.0;
    for (int v = 0; v < n; ++v) {
      double lo = std::log(kPowerFloor);
      double hi = std::log(prog.vars()[static_cast<size_t>(v)].cap);
      double gv = grad[v];
      if (ph[v] <= lo + 1e-12 && gv > 0) gv = 0.0;
      if (ph[v] >= hi - 1e-12 && gv < 0) gv = 0.0;
      m = std::max(m, std::abs(gv));
    }
    return m;
  };

  VectorXd grad = sp6_lagrangian_grad(prog, dual, cfg, p_hat);
  double pg = proj_grad_norm(p_hat, grad);
  if (pg > kStationTol) {
    double fval = sp6_lagrangian(prog, dual, cfg, p_hat);
    double step = 1.0;
    for (int it = 0; it < kDescentCap && pg > kStationTol; ++it) {
      ++out.descent_steps;
      VectorXd trial(n);
      double ftrial = 0.0;
      bool ok = false;
      for (int back = 0; back < 60; ++back) {
        trial = p_hat - step * grad;
        for (int v = 0; v < n; ++v)
          trial[v] = std::clamp(trial[v], std::log(kPowerFloor),
                                std::log(prog.vars()[static_cast<size_t>(v)].cap));
        ftrial = sp6_lagrangian(prog, dual, cfg, trial);
        double decrease = grad.dot(p_hat - trial);
        if (ftrial <= fval - 1e-4 * decrease + 1e-15) {
          ok = true;
          break;
        }
        step *= 0.5;
      }
      if (!ok) break;
      p_hat = trial;
      fval = ftrial;
      step = std::min(step * 2.0, 4.0);
      grad = sp6_lagrangian_grad(prog, dual, cfg, p_hat);
      pg = proj_grad_norm(p_hat, grad);
    }
    p = p_hat.array().exp();
  }
  out.p = p;
  out.proj_grad = pg;
  return out;
}

DualState update_master(const DualState& dual, const VectorXd& p, const Sp6Program& prog,
                        const SystemConfig& cfg) {
  DualState next = dual;
  next.iteration = dual.iteration + 1;
  auto step_of = [&](double eta) {
    return next.iteration > 100 ? eta / std::sqrt(static_cast<double>(next.iteration)) : eta;
  };

  const auto& budgets = prog.budgets();
  for (size_t b = 0; b < budgets.size(); ++b) {
    double used = 0.0;
    for (int v : budgets[b].vars) used += p[v];
    next.mu[static_cast<int>(b)] = std::max(
        0.0, dual.mu[static_cast<int>(b)] - step_of(cfg.step_mu) * (budgets[b].cap - used));
  }
  int nu = 0, kappa = 0, xi = 0, chi = 0;
  for (const RateRow& row : prog.rows()) {
    double surplus = prog.sca_row_surplus(row, p);
    switch (row.type) {
      case RateRow::Type::DirectTraffic:
        next.nu[nu] = std::max(0.0, dual.nu[nu] - step_of(cfg.step_nu) * surplus);
        ++nu;
        break;
      case RateRow::Type::AggTraffic:
        next.kappa[kappa] = std::max(0.0, dual.kappa[kappa] - step_of(cfg.step_kappa) * surplus);
        ++kappa;
        break;
      case RateRow::Type::Coverage:
        next.xi[xi] = std::max(0.0, dual.xi[xi] - step_of(cfg.step_xi) * surplus);
        ++xi;
        break;
      case RateRow::Type::Qos:
        next.chi[chi] = std::max(0.0, dual.chi[chi] - step_of(cfg.step_chi) * surplus);
        ++chi;
        break;
    }
  }
  return next;
}

namespace {

// True-rate feasibility polish over one subframe program.
struct Polish {
  const Sp6Program& prog;
  VectorXd p;

  double budget_used(int b) const {
    double s = 0.0;
    for (int v : prog.budgets()[static_cast<size_t>(b)].vars) s += p[v];
    return s;
  }

  bool budgets_ok() const {
    for (size_t b = 0; b < prog.budgets().size(); ++b)
      if (budget_used(static_cast<int>(b)) > prog.budgets()[b].cap * (1.0 + 1e-9)) return false;
    return true;
  }

  bool all_ok() const {
    if (!budgets_ok()) return false;
    for (const RateRow& row : prog.rows())
      if (prog.true_row_surplus(row, p) < -kRowSafety) return false;
    return true;
  }

  void project_budgets() {
    for (size_t b = 0; b < prog.budgets().size(); ++b) {
      double used = budget_used(static_cast<int>(b));
      double cap = prog.budgets()[b].cap;
      if (used > cap) {
        double s = cap / used;
        for (int v : prog.budgets()[b].vars) p[v] = std::max(p[v] * s, kPowerFloor);
      }
    }
  }

  // Scales the deficient row's own links up toward feasibility within the
  // owner budget. Returns true when the row clears.
  bool raise(const RateRow& row) {
    if (row.lhs.empty()) return false;
    int b = prog.vars()[static_cast<size_t>(prog.expr(row.lhs.front()).var)].budget_group;
    double cap = prog.budgets()[static_cast<size_t>(b)].cap;
    std::vector<int> group;
    for (int id : row.lhs) group.push_back(prog.expr(id).var);
    double group_sum = 0.0;
    for (int v : group) group_sum += p[v];
    if (group_sum <= 0.0) return false;
    double headroom = cap - budget_used(b);
    double smax = 1.0 + std::max(0.0, headroom) / group_sum;
    if (smax <= 1.0 + 1e-12) return false;

    auto surplus_at = [&](double s) {
      VectorXd q = p;
      for (int v : group) q[v] = std::min(p[v] * s, prog.vars()[static_cast<size_t>(v)].cap);
      return prog.true_row_surplus(row, q);
    };
    double hi = smax;
    if (surplus_at(hi) < kRowSafety) {
      for (int v : group) p[v] = std::min(p[v] * hi, prog.vars()[static_cast<size_t>(v)].cap);
      return false;  // budget-capped and still short
    }
    double lo = 1.0;
    for (int it = 0; it < 60 && hi / lo > 1.0 + 1e-9; ++it) {
      double mid = std::sqrt(lo * hi);
      (surplus_at(mid) >= kRowSafety ? hi : lo) = mid;
    }
    for (int v : group) p[v] = std::min(p[v] * hi, prog.vars()[static_cast<size_t>(v)].cap);
    return true;
  }

  // Coordinate bisection down to each variable's feasibility boundary.
  void tighten() {
    for (int sweep = 0; sweep < 5; ++sweep) {
      double before = p.sum();
      for (int v = 0; v < prog.num_vars(); ++v) {
        double hi = p[v];
        if (hi <= kPowerFloor * (1.0 + 1e-9)) continue;
        p[v] = kPowerFloor;
        if (all_ok()) continue;
        double lo = kPowerFloor;
        p[v] = hi;
        for (int it = 0; it < 60 && hi / lo > 1.0 + 1e-8; ++it) {
          double mid = std::sqrt(lo * hi);
          p[v] = mid;
          (all_ok() ? hi : lo) = mid;
        }
        p[v] = hi;
      }
      if (before - p.sum() < 1e-10 * std::max(1.0, before)) break;
    }
  }
};

}  // namespace

Sp5Result solve_sp5(Allocation& al, const ChannelRealization& ch, const SystemConfig& cfg,
                    const Topology& topo, int t) {
  Sp5Result out;
  Sp6Program prog = build_sp6(al, ch, cfg, topo, t);
  out.infeasible_devices = prog.orphan_devices();
  if (prog.num_vars() == 0) {
    out.feasible = out.infeasible_devices.empty();
    return out;
  }

  const int n = prog.num_vars();
  VectorXd p(n);
  for (int v = 0; v < n; ++v) {
    const PowerVar& pv = prog.vars()[static_cast<size_t>(v)];
    double stored = 0.0;
    switch (pv.kind) {
      case PowerVar::Kind::Cu: stored = al.p_cu(pv.node, pv.k, t); break;
      case PowerVar::Kind::IotLicensed: stored = al.p_iot(pv.node, pv.a, pv.k, t); break;
      case PowerVar::Kind::IotUnlicensed: stored = al.p_iot_u(pv.node, pv.a, pv.k, t); break;
    }
    double fallback = pv.kind == PowerVar::Kind::Cu ? cfg.p_cu_max / cfg.num_licensed
                                                    : cfg.p_iot_max / cfg.total_subchannels();
    p[v] = std::clamp(stored > 0.0 ? stored : fallback, kPowerFloor, pv.cap);
  }

  DualState dual = DualState::zeros(prog);
  VectorXd best_feasible;
  double best_obj = std::numeric_limits<double>::infinity();

  for (int round = 0; round < kOuterCap; ++round) {
    ++out.trace.outer_rounds;
    prog.set_reference(p);

    VectorXd slave_p = p;
    double stable_obj = std::numeric_limits<double>::infinity();
    int stable_count = 0;
    for (int it = 0; it < kInnerCap; ++it) {
      ++out.trace.inner_iterations;
      SlaveResult slave = solve_slave(dual, prog, cfg, slave_p);
      if (slave.descent_steps > 0) ++out.trace.fallback_count;
      out.trace.max_proj_grad = std::max(out.trace.max_proj_grad, slave.proj_grad);
      slave_p = slave.p;
      DualState next = update_master(dual, slave_p, prog, cfg);
      double move = next.max_abs_diff(dual);
      dual = next;
      out.trace.max_mult_move = move;
      if (move < kInnerMultTol) break;
      double obj = slave_p.sum();
      if (std::abs(obj - stable_obj) < 1e-6 * std::max(1e-12, stable_obj)) {
        if (++stable_count >= 12) break;  // primal settled while multipliers drift
      } else {
        stable_count = 0;
        stable_obj = obj;
      }
    }

    Polish polish{prog, slave_p};
    polish.project_budgets();
    for (int pass = 0; pass < 40 && !polish.all_ok(); ++pass) {
      bool progressed = false;
      for (const RateRow& row : prog.rows())
        if (prog.true_row_surplus(row, polish.p) < -kRowSafety) progressed |= polish.raise(row);
      if (!progressed) break;
    }
    bool feasible = polish.all_ok();
    if (feasible) {
      polish.tighten();
      double obj = polish.p.sum();
      if (obj < best_obj) {
        best_obj = obj;
        best_feasible = polish.p;
      }
    }

    double move = (polish.p - p).cwiseAbs().maxCoeff();
    p = polish.p;
    if (move < kOuterMoveTol) break;
  }

  if (best_feasible.size()) {
    out.feasible = out.infeasible_devices.empty();
    p = best_feasible;
  } else {
    // Attribute the failure so the caller can unschedule offenders: traffic
    // rows name their device, coverage rows their cluster members, QoS rows
    // the interfering devices (or a CU outage when there are none).
    Polish last{prog, p};
    for (const RateRow& row : prog.rows()) {
      if (prog.true_row_surplus(row, last.p) >= -kRowSafety) continue;
      if (row.type == RateRow::Type::DirectTraffic || row.type == RateRow::Type::AggTraffic) {
        out.infeasible_devices.push_back(row.owner);
      } else if (row.type == RateRow::Type::Coverage) {
        for (int id : row.rhs)
          out.infeasible_devices.push_back(prog.vars()[static_cast<size_t>(prog.expr(id).var)].node);
      } else {
        bool found = false;
        for (int id : row.lhs)
          for (auto [j, g] : prog.expr(id).interferers) {
            (void)g;
            out.infeasible_devices.push_back(prog.vars()[static_cast<size_t>(j)].node);
            found = true;
          }
        if (!found) out.outage_cus.push_back(row.owner);
      }
    }
    std::sort(out.infeasible_devices.begin(), out.infeasible_devices.end());
    out.infeasible_devices.erase(
        std::unique(out.infeasible_devices.begin(), out.infeasible_devices.end()),
        out.infeasible_devices.end());
    Polish guard{prog, p};
    guard.project_budgets();
    p = guard.p;
    out.feasible = false;
  }

  for (int v = 0; v < n; ++v) {
    const PowerVar& pv = prog.vars()[static_cast<size_t>(v)];
    switch (pv.kind) {
      case PowerVar::Kind::Cu: al.p_cu(pv.node, pv.k, t) = p[v]; break;
      case PowerVar::Kind::IotLicensed: al.p_iot(pv.node, pv.a, pv.k, t) = p[v]; break;
      case PowerVar::Kind::IotUnlicensed: al.p_iot_u(pv.node, pv.a, pv.k, t) = p[v]; break;
    }
  }
  out.trace.objective = cfg.epsilon * p.sum();
  return out;
}

}  // namespace iotu
