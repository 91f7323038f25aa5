#pragma once

// Initial data generators. The tall spike and the capped power singularity
// stand in for data that is integrable but far from square integrable.

#include <cstdint>
#include <optional>
#include <string_view>

#include "splap/mesh.hpp"

namespace splap {

enum class InitialKind { sine, spike, power_singularity, random_amplitude };

std::string_view to_string(InitialKind kind) noexcept;
std::optional<InitialKind> parse_initial_kind(std::string_view name) noexcept;

struct InitialSpec {
  InitialKind kind = InitialKind::sine;
  /// Sine/random amplitude, spike height, or prefactor of the singularity.
  double amplitude = 1.0;
  /// Sine mode number m in sin(m pi x / X).
  int mode = 1;
  /// Spike plateau width, centred at `center` (default X/2).
  double width = 0.1;
  /// Spike ramp width on each side; 0 means one mesh cell.
  double ramp = 0.0;
  std::optional<double> center;
  /// Singularity exponent in x^-alpha, must lie in (0, 1).
  double alpha = 0.5;
  /// random_amplitude: A(omega) = amplitude * U(0.5, 1.5) from this seed and the path index.
  std::uint64_t seed = 0;

  /// Throws invalid_argument on out-of-range parameters.
  void validate() const;
};

/// Builds the datum on `grid`. `path_index` only matters for random_amplitude.
GridFunction make_initial(const InitialSpec& spec, const Grid1D& grid, std::uint64_t path_index = 0);

/// Nodewise trunc(level, u0).
GridFunction truncate_initial(const GridFunction& u0, double level);

}  // namespace splap
