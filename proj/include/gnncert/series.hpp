#pragma once

#include <cmath>
#include <cstddef>

namespace gnncert {

/// Half-width of the window around ratio 1 inside which geometric sums use
/// their limit form.
inline constexpr double kUnitRatioWindow = 1e-6;

inline bool near_unit_ratio(double ratio) { return std::abs(ratio - 1.0) < kUnitRatioWindow; }

/// Σ_{k=0}^{count-1} ratioᵏ. Inside the unit window: count plus the
/// first-order correction (ratio−1)·count(count−1)/2.
inline double geometric_partial_sum(double ratio, std::size_t count) {
  const double n = static_cast<double>(count);
  if (near_unit_ratio(ratio)) return n + (ratio - 1.0) * n * (n - 1.0) / 2.0;
  return (std::pow(ratio, n) - 1.0) / (ratio - 1.0);
}

}  // namespace gnncert
