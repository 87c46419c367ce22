/// @file vector_ops.hpp
/// @brief Dense vector kernels. All loops accumulate sequentially in index
/// order so results are bitwise reproducible across runs.

#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace pdhglp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

/// x *= a
inline void scale(double a, std::span<double> x) {
  for (double& v : x) v *= a;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

inline double squared_norm(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  return sum;
}

inline double norm2(std::span<const double> x) { return std::sqrt(squared_norm(x)); }

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

/// Componentwise median(lower, x, upper); infinities in the bounds act as
/// one-sided clamps.
inline void clamp_to_box(std::span<double> x, std::span<const double> lower,
                         std::span<const double> upper) {
  assert(x.size() == lower.size() && x.size() == upper.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = std::min(std::max(x[i], lower[i]), upper[i]);
  }
}

/// max(v, 0) componentwise
inline std::vector<double> positive_part(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(x[i], 0.0);
  return out;
}

/// max(-v, 0) componentwise, so x = positive_part(x) - negative_part(x)
inline std::vector<double> negative_part(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::max(-x[i], 0.0);
  return out;
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Incrementally maintained step-size-weighted running average
///     avg = (1 / sum_i w_i) * sum_i w_i * z_i.
/// The incremental form avg += (w/W)(z - avg) keeps the error below
/// ~1e-10 * (1 + |avg|) over an epoch; the first observation is stored
/// exactly.
class WeightedAverage {
 public:
  explicit WeightedAverage(std::size_t size) : average_(size, 0.0) {}

  void reset() {
    weight_sum_ = 0.0;
    std::fill(average_.begin(), average_.end(), 0.0);
  }

  void add(std::span<const double> value, double weight) {
    assert(value.size() == average_.size());
    assert(weight > 0.0);
    weight_sum_ += weight;
    if (weight_sum_ == weight) {
      std::copy(value.begin(), value.end(), average_.begin());
      return;
    }
    const double ratio = weight / weight_sum_;
    for (std::size_t i = 0; i < average_.size(); ++i) {
      average_[i] += ratio * (value[i] - average_[i]);
    }
  }

  double weight_sum() const { return weight_sum_; }
  bool empty() const { return weight_sum_ == 0.0; }
  const std::vector<double>& value() const { return average_; }

 private:
  double weight_sum_ = 0.0;
  std::vector<double> average_;
};

}  // namespace pdhglp
