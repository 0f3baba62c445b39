// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "iotu/types.hpp"

namespace iotu {

/// Scalar parameters of one scheduling problem. Everything is stored in
/// linear units (watts, linear gains, spectral efficiency per subchannel);
/// dB/dBm conversion happens at config-parse time only.
struct SystemConfig {
  int num_cus = 0;                 // N
  int num_idle_cus = 0;            // Q, subset of the CUs acting as aggregators
  int num_iot = 0;                 // M
  int num_wifi = 0;                // F
  int num_licensed = 1;            // K
  int num_unlicensed_sub = 0;      // K^u, subchannels carved from one unlicensed channel
  int num_unlicensed_channels = 1; // L
  int cycle_len = 1;               // T subframes per scheduling cycle
  int on_len = 1;                  // T_ON subframes with unlicensed access

  double p_cu_max = 0.1995;        // watts
  double p_iot_max = 0.01995;      // watts
  double p_wifi = 0.1995;          // watts, whole unlicensed channel
  double noise_power = 2.264e-15;  // watts per subchannel
  double rate_min = 1.0;           // active-CU QoS floor, bits/s/Hz per subframe
  std::vector<double> traffic;     // d_m per device, same unit as rate_min

  double pathloss_exp = 3.76;      // alpha
  double gain_const = 0.016982;    // linear power gain factor
  double cell_radius = 500.0;      // meters

  double epsilon = 0.05;           // single-stage power weight
  double weight_scale = 100.0;     // rho, integer fairness weight scale
  double convergence_tol = 0.1;    // pi, outer-loop stop threshold

  double step_delta = 5.0;         // scheduling multiplier step
  double step_mu = 0.01;
  double step_nu = 0.01;
  double step_kappa = 0.01;
  double step_xi = 0.01;
  double step_chi = 0.01;

  int sig_alpha = 1;               // messages per channel-sensing report
  int sig_beta = 1;                // messages per subchannel estimation report
  int sig_x = 1;                   // messages per allocation notification

  uint64_t rng_seed = 1;

  int total_subchannels() const { return num_licensed + num_unlicensed_sub; }
  int num_active_cus() const { return num_cus - num_idle_cus; }

  /// Upper bound on the admissible single-stage power weight,
  /// 1 / (M * P_iot + N * P_cu + 1). Configs must pick epsilon strictly below.
  double epsilon_bound() const {
    return 1.0 / (num_iot * p_iot_max + num_cus * p_cu_max + 1.0);
  }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  /// Uniform per-device traffic helper.
  void set_uniform_traffic(double d) { traffic.assign(static_cast<size_t>(num_iot), d); }
};

inline void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (num_cus < 0) fail("num_cus: must be >= 0");
  if (num_idle_cus < 0 || num_idle_cus > num_cus) fail("num_idle_cus: must satisfy 0 <= Q <= N");
  if (num_iot < 0) fail("num_iot: must be >= 0");
  if (num_wifi < 0) fail("num_wifi: must be >= 0");
  if (num_licensed < 1) fail("num_licensed: need at least one licensed subchannel");
  if (num_unlicensed_sub < 0) fail("num_unlicensed_sub: must be >= 0");
  if (num_unlicensed_channels < 1) fail("num_unlicensed_channels: must be >= 1");
  if (cycle_len < 1) fail("cycle_len: must be >= 1");
  if (on_len < 1 || on_len > cycle_len) fail("on_len: must satisfy 1 <= T_ON <= T");
  if (!(p_cu_max > 0)) fail("p_cu_max: must be > 0");
  if (!(p_iot_max > 0)) fail("p_iot_max: must be > 0");
  if (!(p_wifi > 0)) fail("p_wifi: must be > 0");
  if (!(noise_power > 0)) fail("noise_power: must be > 0");
  if (!(cell_radius > 0)) fail("cell_radius: must be > 0");
  if (!(rate_min > 0)) fail("rate_min: must be > 0");
  if (traffic.size() != static_cast<size_t>(num_iot)) fail("traffic: need one entry per device");
  for (double d : traffic)
    if (!(d > 0)) fail("traffic: entries must be > 0");
  if (!(pathloss_exp > 0)) fail("pathloss_exp: must be > 0");
  if (!(gain_const > 0)) fail("gain_const: must be > 0");
  if (!(weight_scale > 0)) fail("weight_scale: must be > 0");
  if (!(convergence_tol > 0)) fail("convergence_tol: must be > 0");
  for (double s : {step_delta, step_mu, step_nu, step_kappa, step_xi, step_chi})
    if (!(s > 0)) fail("step_sizes: must be > 0");
  if (sig_alpha < 0 || sig_beta < 0 || sig_x < 0) fail("signaling_costs: must be >= 0");
  if (!(epsilon > 0) || epsilon >= epsilon_bound()) {
    fail("epsilon: must lie in (0, 1/(M*P_iot + N*P_cu + 1)) = (0, " +
         std::to_string(epsilon_bound()) + ")");
  }
}

}  // namespace iotu
