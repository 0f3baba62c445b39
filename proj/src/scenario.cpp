// SPDX-License-Identifier: Apache-2.0
#include "iotu/scenario.hpp"

#include <algorithm>
#include <ostream>

namespace iotu {

bool Topology::is_idle_cu(int n) const {
  return std::binary_search(idle_cu_ids.begin(), idle_cu_ids.end(), n);
}

double path_gain(double dist, const SystemConfig& cfg) {
  if (dist <= 0.0) throw std::domain_error("degenerate colocated nodes");
  return cfg.gain_const * std::pow(dist, -cfg.pathloss_exp);
}

double channel_gain(double dist, const SystemConfig& cfg, Rng& rng) {
  return path_gain(dist, cfg) * rng.exp_unit();
}

namespace {

Point sample_disk(double radius, Rng& rng) {
  double r = radius * std::sqrt(rng.uniform());
  double phi = 2.0 * M_PI * rng.uniform();
  return {r * std::cos(phi), r * std::sin(phi)};
}

// Resamples until the candidate is strictly away from the origin and every
// already placed node; zero distances would blow up the path-loss model.
Point sample_distinct(double radius, Rng& rng, const std::vector<const std::vector<Point>*>& placed) {
  for (;;) {
    Point p = sample_disk(radius, rng);
    if (p.x == 0.0 && p.y == 0.0) continue;
    bool clash = false;
    for (const auto* group : placed) {
      for (const Point& q : *group) {
        if (p.x == q.x && p.y == q.y) {
          clash = true;
          break;
        }
      }
      if (clash) break;
    }
    if (!clash) return p;
  }
}

}  // namespace

Topology generate_topology(const SystemConfig& cfg, Rng& rng) {
  Topology topo;
  topo.bs_position = {0.0, 0.0};
  topo.cu_positions.reserve(static_cast<size_t>(cfg.num_cus));
  for (int n = 0; n < cfg.num_cus; ++n)
    topo.cu_positions.push_back(sample_distinct(cfg.cell_radius, rng, {&topo.cu_positions}));
  for (int m = 0; m < cfg.num_iot; ++m)
    topo.iot_positions.push_back(
        sample_distinct(cfg.cell_radius, rng, {&topo.cu_positions, &topo.iot_positions}));
  for (int f = 0; f < cfg.num_wifi; ++f)
    topo.wifi_positions.push_back(sample_distinct(
        cfg.cell_radius, rng, {&topo.cu_positions, &topo.iot_positions, &topo.wifi_positions}));

  // Idle CU ids without replacement (Fisher-Yates prefix), kept sorted.
  std::vector<int> ids(static_cast<size_t>(cfg.num_cus));
  for (int n = 0; n < cfg.num_cus; ++n) ids[static_cast<size_t>(n)] = n;
  for (int i = 0; i < cfg.num_idle_cus; ++i) {
    int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(cfg.num_cus - i)));
    std::swap(ids[static_cast<size_t>(i)], ids[static_cast<size_t>(j)]);
  }
  topo.idle_cu_ids.assign(ids.begin(), ids.begin() + cfg.num_idle_cus);
  std::sort(topo.idle_cu_ids.begin(), topo.idle_cu_ids.end());
  return topo;
}

Tensor3<double> wifi_interference(const SystemConfig& cfg, const Tensor4<double>& wifi_gains) {
  if (cfg.num_unlicensed_sub == 0) throw std::domain_error("no unlicensed subchannels");
  const int F = wifi_gains.dim0(), Q = wifi_gains.dim1();
  const int Ku = wifi_gains.dim2(), T = wifi_gains.dim3();
  Tensor3<double> out(Q, Ku, T, 0.0);
  const double per_sub = cfg.p_wifi / cfg.num_unlicensed_sub;
  for (int f = 0; f < F; ++f)
    for (int q = 0; q < Q; ++q)
      for (int k = 0; k < Ku; ++k)
        for (int t = 0; t < T; ++t) out(q, k, t) += per_sub * wifi_gains(f, q, k, t);
  return out;
}

ChannelRealization generate_channels(const Topology& topo, const SystemConfig& cfg, Rng& rng) {
  const int N = cfg.num_cus, M = cfg.num_iot, Q = cfg.num_idle_cus, F = cfg.num_wifi;
  const int K = cfg.num_licensed, Ku = cfg.num_unlicensed_sub, T = cfg.cycle_len;

  ChannelRealization ch;
  ch.cu_bs = Tensor3<double>(N, K, T);
  ch.iot_bs = Tensor3<double>(M, K, T);
  ch.cu_cu = Tensor4<double>(N, Q, K, T);
  ch.iot_cu = Tensor4<double>(M, Q, K, T);
  ch.iot_cu_u = Tensor4<double>(M, Q, Ku, T);
  ch.wifi_cu_u = Tensor4<double>(F, Q, Ku, T);

  auto fade3 = [&](Tensor3<double>& g, int i, double pg) {
    for (int k = 0; k < g.dim1(); ++k)
      for (int t = 0; t < T; ++t) g(i, k, t) = pg * rng.exp_unit();
  };
  auto fade4 = [&](Tensor4<double>& g, int i, int q, double pg) {
    for (int k = 0; k < g.dim2(); ++k)
      for (int t = 0; t < T; ++t) g(i, q, k, t) = pg * rng.exp_unit();
  };

  for (int n = 0; n < N; ++n)
    fade3(ch.cu_bs, n, path_gain(distance(topo.cu_positions[n], topo.bs_position), cfg));
  for (int m = 0; m < M; ++m)
    fade3(ch.iot_bs, m, path_gain(distance(topo.iot_positions[m], topo.bs_position), cfg));
  for (int n = 0; n < N; ++n)
    for (int q = 0; q < Q; ++q) {
      if (n == topo.idle_cu_ids[q]) continue;  // no self link
      fade4(ch.cu_cu, n, q, path_gain(distance(topo.cu_positions[n], topo.idle_cu(q)), cfg));
    }
  for (int m = 0; m < M; ++m)
    for (int q = 0; q < Q; ++q) {
      double pg = path_gain(distance(topo.iot_positions[m], topo.idle_cu(q)), cfg);
      fade4(ch.iot_cu, m, q, pg);
      fade4(ch.iot_cu_u, m, q, pg);
    }
  for (int f = 0; f < F; ++f)
    for (int q = 0; q < Q; ++q)
      fade4(ch.wifi_cu_u, f, q, path_gain(distance(topo.wifi_positions[f], topo.idle_cu(q)), cfg));

  if (Ku > 0)
    ch.wifi_interference = wifi_interference(cfg, ch.wifi_cu_u);
  else
    ch.wifi_interference = Tensor3<double>(Q, 0, T);
  return ch;
}

void dump_topology_csv(const Topology& topo, std::ostream& os) {
  os << "node_id,kind,x,y\n";
  os << "0,bs,0,0\n";
  int id = 1;
  for (size_t n = 0; n < topo.cu_positions.size(); ++n, ++id) {
    const char* kind = topo.is_idle_cu(static_cast<int>(n)) ? "idle_cu" : "cu";
    os << id << ',' << kind << ',' << topo.cu_positions[n].x << ',' << topo.cu_positions[n].y
       << '\n';
  }
  for (const Point& p : topo.iot_positions) os << id++ << ",iot," << p.x << ',' << p.y << '\n';
  for (const Point& p : topo.wifi_positions) os << id++ << ",wifi," << p.x << ',' << p.y << '\n';
}

}  // namespace iotu
