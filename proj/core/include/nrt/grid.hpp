#pragma once

#include <cstddef>

namespace nrt {

/// Uniform grid on [x_min, x_max] with `n` nodes, both ends included.
struct UniformGrid {
  double x_min = -10.0;
  double x_max = 10.0;
  std::size_t n = 801;

  double spacing() const { return (x_max - x_min) / static_cast<double>(n - 1); }
  double x(std::size_t i) const {
    // Exact endpoints, no accumulated drift.
    if (i + 1 == n) return x_max;
    return x_min + static_cast<double>(i) * spacing();
  }

  bool operator==(const UniformGrid&) const = default;
};

}  // namespace nrt
