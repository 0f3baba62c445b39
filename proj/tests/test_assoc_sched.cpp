// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iotu/assoc_sched.hpp"
#include "test_util.hpp"

using namespace iotu;
using namespace iotu_test;

namespace {

// Exhaustive binary enumeration of a built instance (the SP3 contract is
// exactness with respect to the linearized integer program).
double enumerate_instance(const IlpInstance& inst, const VectorXd& obj, double offset,
                          std::vector<uint8_t>* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  const int n = inst.ncols;
  REQUIRE(n <= 22);
  std::vector<uint8_t> x(static_cast<size_t>(n));
  for (uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    for (int j = 0; j < n; ++j) x[static_cast<size_t>(j)] = (mask >> j) & 1;
    bool ok = true;
    for (const LpRow& r : inst.rows) {
      double s = 0.0;
      for (auto [j, v] : r.coeffs) s += v * x[static_cast<size_t>(j)];
      if (r.sense == Sense::LE && s > r.rhs + 1e-9) ok = false;
      if (r.sense == Sense::GE && s < r.rhs - 1e-9) ok = false;
      if (r.sense == Sense::EQ && std::abs(s - r.rhs) > 1e-9) ok = false;
      if (!ok) break;
    }
    if (!ok) continue;
    double o = offset;
    for (int j = 0; j < n; ++j)
      if (x[static_cast<size_t>(j)]) o += obj[j];
    if (o < best) {
      best = o;
      if (argmin) *argmin = x;
    }
  }
  return best;
}

// Value lookup for RateExpr::eval keyed by the packed variable id.
std::function<double(int64_t)> slice_values(const Allocation& al, int t) {
  return [&al, t](int64_t key) -> double {
    int k = static_cast<int>(key & 0xFFF) - 1;
    int a = static_cast<int>((key >> 12) & 0xFFF) - 1;
    int m = static_cast<int>((key >> 24) & 0xFFFF) - 1;
    switch (static_cast<VarKind>(key >> 40)) {
      case VarKind::Phi: return al.phi(a, k, t) ? 1.0 : 0.0;
      case VarKind::Theta: return al.theta(m, a, k, t) ? 1.0 : 0.0;
      case VarKind::Beta: return al.beta(m, a, k, t) ? 1.0 : 0.0;
      case VarKind::F: return al.assoc(m, a, t) ? 1.0 : 0.0;
      case VarKind::C: return al.sched(m, t) ? 1.0 : 0.0;
    }
    return 0.0;
  };
}

}  // namespace

TEST_CASE("logic rows: direct substitutions") {
  // Q = 1, group (f_0, f_1): f = (1,0), c = 1 satisfied; f = (0,0), c = 1 rejected.
  CHECK(or_coupling_rows_hold({1, 0}, 1));
  CHECK_FALSE(or_coupling_rows_hold({0, 0}, 1));
}

TEST_CASE("logic rows: exhaustive equivalence with the product form") {
  for (int size = 1; size <= 4; ++size) {
    for (uint64_t mask = 0; mask < (1ULL << (size + 1)); ++mask) {
      std::vector<int> group(static_cast<size_t>(size));
      for (int i = 0; i < size; ++i) group[static_cast<size_t>(i)] = (mask >> i) & 1;
      int or_value = (mask >> size) & 1;
      CHECK(or_coupling_rows_hold(group, or_value) ==
            or_coupling_product_holds(group, or_value));
    }
  }
}

TEST_CASE("linearized rates: exact at the reference point") {
  SystemConfig cfg = make_cfg(3, 3, 2, 2, 2, 2, 1);
  Rng rng(50);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  Allocation ref = random_allocation(cfg, rng, 0.35);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  // The linearization holds powers fixed: pin the reference's stored powers
  // to the working matrix so true rates and expressions agree.
  for (int m = 0; m < ref.M; ++m)
    for (int a = 0; a <= ref.Q; ++a)
      for (int k = 0; k < ref.K; ++k)
        for (int t = 0; t < ref.T; ++t)
          ref.p_iot(m, a, k, t) = ref.theta(m, a, k, t) ? power.iot(m, a, k, t) : 0.0;
  for (int m = 0; m < ref.M; ++m)
    for (int q = 0; q < ref.Q; ++q)
      for (int k = 0; k < ref.Ku; ++k)
        for (int t = 0; t < cfg.on_len; ++t)
          ref.p_iot_u(m, q, k, t) = ref.beta(m, q, k, t) ? power.iot_u(m, q, k, t) : 0.0;
  for (int n = 0; n < ref.N; ++n)
    for (int k = 0; k < ref.K; ++k)
      for (int t = 0; t < ref.T; ++t)
        ref.p_cu(n, k, t) = ref.phi(n, k, t) ? power.cu(n, k, t) : 0.0;

  for (int t = 0; t < cfg.cycle_len; ++t) {
    LinearizedRates lr = linearize_rates(ch, power, ref, cfg, topo, t);
    SubframeRates truth = compute_rates(ref, ch, cfg, topo, t);
    auto val = slice_values(ref, t);
    for (int n = 0; n < cfg.num_cus; ++n)
      for (int k = 0; k < cfg.num_licensed; ++k)
        CHECK(lr.cell(n, k).eval(val) == doctest::Approx(truth.cellular(n, k)).epsilon(1e-9));
    for (int m = 0; m < cfg.num_iot; ++m)
      for (int k = 0; k < cfg.num_licensed; ++k) {
        CHECK(lr.dir(m, k).eval(val) == doctest::Approx(truth.direct(m, k)).epsilon(1e-9));
        for (int q = 0; q < cfg.num_idle_cus; ++q)
          CHECK(lr.agg(m, q, k).eval(val) == doctest::Approx(truth.m2m(m, q, k)).epsilon(1e-9));
      }
    if (t < cfg.on_len)
      for (int m = 0; m < cfg.num_iot; ++m)
        for (int q = 0; q < cfg.num_idle_cus; ++q)
          for (int k = 0; k < cfg.num_unlicensed_sub; ++k)
            CHECK(lr.agg_u(m, q, k).eval(val) ==
                  doctest::Approx(truth.m2m_u(m, q, k)).epsilon(1e-9));
  }
}

TEST_CASE("linearized rates: single flips of expanded indicators are exact") {
  SystemConfig cfg = make_cfg(3, 2, 1, 2, 1, 1, 1);
  Rng rng(51);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);

  Allocation ref(cfg);
  ref.phi(1, 0, 0) = 1;  // CU 1 cellular link on k=0
  ref.p_cu(1, 0, 0) = power.cu(1, 0, 0);
  ref.theta(1, 1, 0, 0) = 1;  // device 1 relays to idle slot 0 on the same k
  ref.p_iot(1, 1, 0, 0) = power.iot(1, 1, 0, 0);

  const int t = 0;
  LinearizedRates lr = linearize_rates(ch, power, ref, cfg, topo, t);

  // Flip the interfering theta off: the cellular expression tracks the true
  // rate exactly for a one-variable flip.
  Allocation flipped = ref;
  flipped.theta(1, 1, 0, 0) = 0;
  flipped.p_iot(1, 1, 0, 0) = 0.0;
  SubframeRates truth = compute_rates(flipped, ch, cfg, topo, t);
  CHECK(lr.cell(1, 0).eval(slice_values(flipped, t)) ==
        doctest::Approx(truth.cellular(1, 0)).epsilon(1e-9));

  // Flip a fresh interferer on for the m2m expression of (device 1, slot 0).
  Allocation on = ref;
  on.theta(2, 0, 0, 0) = 1;  // device 2 direct on the same subchannel
  on.p_iot(2, 0, 0, 0) = power.iot(2, 0, 0, 0);
  truth = compute_rates(on, ch, cfg, topo, t);
  CHECK(lr.agg(1, 0, 0).eval(slice_values(on, t)) ==
        doctest::Approx(truth.m2m(1, 0, 0)).epsilon(1e-9));

  // Own-indicator flip from the reference (phi of CU 0 turns on).
  Allocation own = ref;
  own.phi(0, 0, 0) = 1;
  own.p_cu(0, 0, 0) = power.cu(0, 0, 0);
  truth = compute_rates(own, ch, cfg, topo, t);
  CHECK(lr.cell(0, 0).eval(slice_values(own, t)) ==
        doctest::Approx(truth.cellular(0, 0)).epsilon(1e-9));
}

TEST_CASE("linearized rates: isolated link coefficient is the clean-channel rate") {
  SystemConfig cfg = make_cfg(1, 1, 0, 1, 0, 1, 1);
  Rng rng(52);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  Allocation ref(cfg);
  LinearizedRates lr = linearize_rates(ch, power, ref, cfg, topo, 0);
  double expect = std::log2(1.0 + power.cu(0, 0, 0) * ch.cu_bs(0, 0, 0) / cfg.noise_power);
  CHECK(lr.cell(0, 0).own_coef == doctest::Approx(expect).epsilon(1e-12));
  CHECK(lr.cell(0, 0).constant == doctest::Approx(0.0));
}

TEST_CASE("update_delta: subgradient cases") {
  SystemConfig cfg = make_cfg(3, 1, 0, 1, 0, 2, 1);
  Allocation al(cfg);
  al.sched(0, 0) = 1;               // scheduled exactly once: unchanged
  al.sched(2, 0) = al.sched(2, 1) = 1;  // twice: grows
  VectorXd delta(3);
  delta << 0.7, 0.1, 1.0;
  cfg.step_delta = 0.2;
  VectorXd next = update_delta(delta, al, cfg);
  CHECK(next[0] == doctest::Approx(0.7));
  CHECK(next[1] == doctest::Approx(0.0));  // projection at zero
  CHECK(next[2] == doctest::Approx(1.2));
  CHECK(next.minCoeff() >= 0.0);
}

TEST_CASE("sp3: unsatisfiable traffic forces the empty subframe") {
  SystemConfig cfg = make_cfg(1, 1, 1, 2, 1, 1, 1);
  cfg.set_uniform_traffic(1e9);
  Rng rng(53);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  FairnessWeights w = uniform_weights(cfg);
  Allocation ref(cfg);
  SchedOptions opts;
  Sp3Model model(ch, power, cfg, topo, ref, w, 0, opts);
  IlpSolver solver(model.instance());
  Sp3Result res = solve_sp3(model, solver, VectorXd::Zero(1), nullptr);
  Allocation al(cfg);
  if (!res.all_zero) model.apply(res.x, power, al);
  CHECK(al.sched(0, 0) == 0);
  CHECK(raw_scheduled(al) == 0);
}

TEST_CASE("sp3: generous instance schedules with a licensed anchor (vs enumeration)") {
  SystemConfig cfg = make_cfg(1, 1, 1, 2, 0, 1, 1);
  cfg.set_uniform_traffic(0.2);
  Rng rng(54);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  FairnessWeights w = uniform_weights(cfg);
  Allocation ref(cfg);
  SchedOptions opts;
  Sp3Model model(ch, power, cfg, topo, ref, w, 0, opts);
  IlpSolver solver(model.instance());
  VectorXd delta = VectorXd::Zero(1);
  Sp3Result res = solve_sp3(model, solver, delta, nullptr);
  REQUIRE_FALSE(res.all_zero);

  double offset = 0.0;
  VectorXd obj = model.objective(delta, &offset);
  std::vector<uint8_t> arg;
  double truth = enumerate_instance(model.instance(), obj, offset, &arg);
  CHECK(res.objective == doctest::Approx(truth).epsilon(1e-9));

  Allocation al(cfg);
  model.apply(res.x, power, al);
  CHECK(al.sched(0, 0) == 1);
  int anchors = 0;
  for (int a = 0; a <= cfg.num_idle_cus; ++a)
    for (int k = 0; k < cfg.num_licensed; ++k) anchors += al.theta(0, a, k, 0);
  CHECK(anchors >= 1);
}

TEST_CASE("sp3: optimum equals exhaustive enumeration on random small instances") {
  Rng rng(55);
  for (int trial = 0; trial < 12; ++trial) {
    SystemConfig cfg = make_cfg(2, 2, 1, 2, 1, 1, 1);
    cfg.set_uniform_traffic(rng.uniform(0.5, 4.0));
    Topology topo = make_topology(cfg, rng);
    ChannelRealization ch = random_channels(topo, cfg, rng);
    PowerMatrix power = PowerMatrix::equal_split(cfg);
    FairnessWeights w = uniform_weights(cfg);
    Allocation ref = trial % 2 ? random_allocation(cfg, rng, 0.2) : Allocation(cfg);
    SchedOptions opts;
    Sp3Model model(ch, power, cfg, topo, ref, w, 0, opts);
    if (model.qos_impossible()) continue;
    if (model.instance().ncols > 22) continue;
    IlpSolver solver(model.instance());
    VectorXd delta(2);
    delta << rng.uniform(0.0, 50.0), rng.uniform(0.0, 50.0);
    Sp3Result res = solve_sp3(model, solver, delta, nullptr);
    double offset = 0.0;
    VectorXd obj = model.objective(delta, &offset);
    double truth = enumerate_instance(model.instance(), obj, offset);
    if (res.all_zero) {
      CHECK(std::isinf(truth));
    } else {
      CHECK(res.objective == doctest::Approx(truth).epsilon(1e-9));
    }
  }
}

TEST_CASE("dual loop: single device lands in exactly one subframe") {
  SystemConfig cfg = make_cfg(1, 1, 1, 2, 1, 2, 1);
  cfg.set_uniform_traffic(0.3);
  Rng rng(56);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  FairnessWeights w = uniform_weights(cfg);
  SchedOptions opts;
  AssocSchedOutcome out = solve_association_scheduling(ch, power, cfg, topo, Allocation(cfg), w,
                                                       opts);
  int times = 0;
  for (int t = 0; t < cfg.cycle_len; ++t) times += out.alloc.sched(0, t);
  CHECK(times == 1);
  CHECK(out.delta.minCoeff() >= 0.0);
}

TEST_CASE("dual loop: repaired output is checker-clean on a generous instance") {
  SystemConfig cfg = make_cfg(4, 3, 2, 3, 2, 2, 1);
  cfg.set_uniform_traffic(0.3);
  cfg.rate_min = 0.5;
  Rng rng(57);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  FairnessWeights w = uniform_weights(cfg);
  SchedOptions opts;
  AssocSchedOutcome out =
      solve_association_scheduling(ch, power, cfg, topo, Allocation(cfg), w, opts);
  CHECK(raw_scheduled(out.alloc) >= 1);

  // Structural constraints always hold after repair; rate rows hold here
  // because the margins are generous at the working power.
  ViolationReport rep = check_feasibility(out.alloc, ch, cfg, topo);
  for (const Violation& v : rep) {
    CAPTURE(constraint_name(v.id));
    bool rate_row = v.id == ConstraintId::RateCellularMode ||
                    v.id == ConstraintId::RateAggregationMode ||
                    v.id == ConstraintId::CuCoverage || v.id == ConstraintId::CuQos;
    CHECK(rate_row);  // structural violations are outright bugs
  }
}

TEST_CASE("dual loop: repair pass never increases structural violations") {
  SystemConfig cfg = make_cfg(3, 2, 1, 2, 1, 3, 2);
  cfg.set_uniform_traffic(0.4);
  Rng rng(58);
  Topology topo = make_topology(cfg, rng);
  ChannelRealization ch = random_channels(topo, cfg, rng);
  PowerMatrix power = PowerMatrix::equal_split(cfg);
  FairnessWeights w = uniform_weights(cfg);
  SchedOptions opts;
  AssocSchedOutcome out =
      solve_association_scheduling(ch, power, cfg, topo, Allocation(cfg), w, opts);
  for (int m = 0; m < cfg.num_iot; ++m) {
    int times = 0;
    for (int t = 0; t < cfg.cycle_len; ++t) times += out.alloc.sched(m, t);
    CHECK(times <= 1);
  }
}
