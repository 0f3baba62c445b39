// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iotu/duty_cycle.hpp"
#include "iotu/types.hpp"

using namespace iotu;

TEST_CASE("is_on: prefix placement") {
  CycleSchedule s{4, 1, 0};
  CHECK(is_on(0, s));
  CHECK_FALSE(is_on(1, s));
  CHECK_FALSE(is_on(3, s));

  CycleSchedule full{4, 4, 0};
  int on = 0;
  for (int t = 0; t < 4; ++t) on += is_on(t, full) ? 1 : 0;
  CHECK(on == 4);
}

TEST_CASE("is_on: count equals the ON length") {
  for (int T = 1; T <= 6; ++T)
    for (int Ton = 1; Ton <= T; ++Ton) {
      CycleSchedule s{T, Ton, 0};
      int on = 0;
      for (int t = 0; t < T; ++t) on += is_on(t, s) ? 1 : 0;
      CHECK(on == Ton);
    }
}

TEST_CASE("select_channel: argmin with lowest-index tie break") {
  CHECK(select_channel({3.0, 1.0, 2.0}) == 1);
  CHECK(select_channel({5.0, 5.0}) == 0);
  CHECK_THROWS_AS(select_channel({}), std::invalid_argument);
}

TEST_CASE("select_channel: matches a naive scan on random vectors") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    int L = 1 + static_cast<int>(rng.below(8));
    std::vector<double> v(static_cast<size_t>(L));
    for (double& x : v) x = rng.uniform();
    int naive = 0;
    for (int l = 1; l < L; ++l)
      if (v[static_cast<size_t>(l)] < v[static_cast<size_t>(naive)]) naive = l;
    CHECK(select_channel(v) == naive);
  }
}

TEST_CASE("signaling overhead: formula collapse at M = 0") {
  SystemConfig cfg;
  cfg.num_iot = 0;
  cfg.num_cus = 3;
  cfg.num_licensed = 4;
  cfg.num_unlicensed_sub = 2;
  cfg.cycle_len = 5;
  cfg.on_len = 2;
  cfg.sig_alpha = 2;
  cfg.sig_beta = 3;
  cfg.sig_x = 4;
  // beta * N * K * T + x * N * T
  CHECK(signaling_overhead(cfg) == 3 * 3 * 4 * 5 + 4 * 3 * 5);
}

TEST_CASE("signaling overhead: hand-counted example") {
  SystemConfig cfg;
  cfg.sig_alpha = cfg.sig_beta = cfg.sig_x = 1;
  cfg.num_iot = 2;
  cfg.num_cus = 1;
  cfg.num_unlicensed_channels = 2;
  cfg.num_licensed = 2;
  cfg.num_unlicensed_sub = 2;
  cfg.cycle_len = 2;
  cfg.on_len = 1;
  CHECK(signaling_overhead(cfg) == 26);  // 4 + 16 + 6
}

TEST_CASE("signaling overhead: notification term scales alone") {
  SystemConfig cfg;
  cfg.num_iot = 3;
  cfg.num_cus = 2;
  cfg.num_unlicensed_channels = 2;
  cfg.num_licensed = 3;
  cfg.num_unlicensed_sub = 1;
  cfg.cycle_len = 4;
  cfg.on_len = 2;
  cfg.sig_alpha = 1;
  cfg.sig_beta = 1;
  cfg.sig_x = 1;
  int64_t base = signaling_overhead(cfg);
  cfg.sig_x = 2;
  int64_t doubled = signaling_overhead(cfg);
  CHECK(doubled - base == static_cast<int64_t>(cfg.num_iot + cfg.num_cus) * cfg.cycle_len);
}

TEST_CASE("signaling overhead: monotone in the counts") {
  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    SystemConfig cfg;
    cfg.num_iot = 1 + static_cast<int>(rng.below(10));
    cfg.num_cus = 1 + static_cast<int>(rng.below(10));
    cfg.num_licensed = 1 + static_cast<int>(rng.below(6));
    cfg.num_unlicensed_sub = static_cast<int>(rng.below(6));
    cfg.num_unlicensed_channels = 1 + static_cast<int>(rng.below(4));
    cfg.cycle_len = 2 + static_cast<int>(rng.below(5));
    cfg.on_len = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(cfg.cycle_len)));
    int64_t base = signaling_overhead(cfg);

    SystemConfig c2 = cfg;
    c2.num_iot += 1;
    CHECK(signaling_overhead(c2) >= base);
    c2 = cfg;
    c2.num_cus += 1;
    CHECK(signaling_overhead(c2) >= base);
    c2 = cfg;
    c2.num_licensed += 1;
    CHECK(signaling_overhead(c2) >= base);
    c2 = cfg;
    c2.num_unlicensed_sub += 1;
    CHECK(signaling_overhead(c2) >= base);
    c2 = cfg;
    c2.cycle_len += 1;
    CHECK(signaling_overhead(c2) >= base);
  }
}

TEST_CASE("epsilon bound: direct evaluation and monotonicity") {
  SystemConfig cfg;
  cfg.num_iot = 300;
  cfg.num_cus = 15;
  cfg.p_iot_max = 0.01995;
  cfg.p_cu_max = 0.1995;
  CHECK(cfg.epsilon_bound() == doctest::Approx(0.1002).epsilon(1e-3));

  cfg.num_iot = 0;
  cfg.num_cus = 0;
  CHECK(cfg.epsilon_bound() == doctest::Approx(1.0));

  cfg.num_cus = 15;
  double prev = cfg.epsilon_bound();
  for (int m : {10, 50, 200}) {
    cfg.num_iot = m;
    CHECK(cfg.epsilon_bound() < prev);
    prev = cfg.epsilon_bound();
  }
}

TEST_CASE("config validation: epsilon must sit below the bound") {
  SystemConfig cfg;
  cfg.num_cus = 2;
  cfg.num_idle_cus = 1;
  cfg.num_iot = 2;
  cfg.set_uniform_traffic(1.0);
  cfg.epsilon = cfg.epsilon_bound();  // boundary excluded
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilon = cfg.epsilon_bound() / 2.0;
  CHECK_NOTHROW(cfg.validate());
}
