#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace lke {

using cd = std::complex<double>;

/// Sign with sgn(0) = +1, the convention used throughout the dispersion.
inline double sgn_pos(double x) { return x < 0.0 ? -1.0 : 1.0; }

/// Pairwise (cascade) summation. Used for every O(N) or larger kernel sum so
/// that results are reproducible and the rounding error stays O(log n) ulp.
template <typename T>
T pairwise_sum(const T* data, std::size_t n) {
  if (n == 0) return T{};
  if (n <= 8) {
    T acc = data[0];
    for (std::size_t i = 1; i < n; ++i) acc += data[i];
    return acc;
  }
  std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace lke
