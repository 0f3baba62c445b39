// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace iotu {

using Eigen::ArrayXd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Dense row-major tensor with 3 or 4 index dimensions. Eigen covers the
/// 1-D/2-D needs of the numeric kernels; indicator and gain tensors ride on
/// these thin wrappers instead.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int d0, int d1, int d2, T fill = T{})
      : d0_(d0), d1_(d1), d2_(d2), data_(static_cast<size_t>(d0) * d1 * d2, fill) {}

  T& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
  const T& operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }
  size_t size() const { return data_.size(); }
  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  const std::vector<T>& raw() const { return data_; }
  std::vector<T>& raw() { return data_; }

 private:
  size_t idx(int i, int j, int k) const {
    return (static_cast<size_t>(i) * d1_ + j) * d2_ + k;
  }
  int d0_ = 0, d1_ = 0, d2_ = 0;
  std::vector<T> data_;
};

template <typename T>
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int d0, int d1, int d2, int d3, T fill = T{})
      : d0_(d0), d1_(d1), d2_(d2), d3_(d3),
        data_(static_cast<size_t>(d0) * d1 * d2 * d3, fill) {}

  T& operator()(int i, int j, int k, int l) { return data_[idx(i, j, k, l)]; }
  const T& operator()(int i, int j, int k, int l) const { return data_[idx(i, j, k, l)]; }

  int dim0() const { return d0_; }
  int dim1() const { return d1_; }
  int dim2() const { return d2_; }
  int dim3() const { return d3_; }
  size_t size() const { return data_.size(); }
  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  const std::vector<T>& raw() const { return data_; }
  std::vector<T>& raw() { return data_; }

 private:
  size_t idx(int i, int j, int k, int l) const {
    return ((static_cast<size_t>(i) * d1_ + j) * d2_ + k) * d3_ + l;
  }
  int d0_ = 0, d1_ = 0, d2_ = 0, d3_ = 0;
  std::vector<T> data_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double log2p1(double x) { return std::log2(1.0 + x); }

/// Deterministic generator: splitmix-seeded mt19937_64 with explicit
/// inverse-CDF draws so sequences do not depend on the standard library's
/// distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 0x1234567ULL) {}

  /// One stream per (seed, replication) pair.
  static Rng stream(uint64_t seed, uint64_t replication) {
    return Rng(seed ^ (0xD1B54A32D192ED03ULL * (replication + 1)));
  }

  uint64_t next_u64() {
    // splitmix64
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit-mean exponential (squared magnitude of a standard complex Gaussian).
  double exp_unit() {
    double u = uniform();
    return -std::log1p(-u);
  }

  /// Integer in [0, n).
  uint64_t below(uint64_t n) { return next_u64() % n; }

 private:
  uint64_t state_;
};

}  // namespace iotu
