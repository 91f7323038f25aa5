#pragma once

// Property suite for the truncation catalog, evaluated on quasi-random points.

#include <cstddef>
#include <string>
#include <vector>

namespace splap {

struct PropertyCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  /// Largest amount by which the property was exceeded (0 when it always held).
  double worst = 0.0;
  bool ok() const noexcept { return checked > 0 && failures == 0; }
};

/// Runs every property on `n_points` points of a low-discrepancy sequence.
/// Sample coordinates cover r in [-12, 12] and parameters in [0.1, 4].
std::vector<PropertyCheck> truncation_property_suite(std::size_t n_points);

}  // namespace splap
