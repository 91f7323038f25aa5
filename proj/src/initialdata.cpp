#include "splap/initialdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "splap/error.hpp"
#include "splap/sde.hpp"
#include "splap/truncations.hpp"

namespace splap {

std::string_view to_string(InitialKind kind) noexcept {
  switch (kind) {
    case InitialKind::sine: return "sine";
    case InitialKind::spike: return "spike";
    case InitialKind::power_singularity: return "power_singularity";
    case InitialKind::random_amplitude: return "random_amplitude";
  }
  return "unknown";
}

std::optional<InitialKind> parse_initial_kind(std::string_view name) noexcept {
  for (InitialKind k : {InitialKind::sine, InitialKind::spike, InitialKind::power_singularity,
                        InitialKind::random_amplitude}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

void InitialSpec::validate() const {
  if (!std::isfinite(amplitude)) throw_invalid("initial amplitude must be finite");
  switch (kind) {
    case InitialKind::sine:
    case InitialKind::random_amplitude:
      if (mode < 1) throw_invalid("sine mode must be a positive integer");
      break;
    case InitialKind::spike:
      require_positive(width, "spike width");
      if (!(ramp >= 0.0) || !std::isfinite(ramp)) throw_invalid("spike ramp must be >= 0");
      if (center && !std::isfinite(*center)) throw_invalid("spike center must be finite");
      break;
    case InitialKind::power_singularity:
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw_invalid("power singularity exponent alpha must lie in (0, 1) to stay integrable");
      }
      break;
  }
}

GridFunction make_initial(const InitialSpec& spec, const Grid1D& grid, std::uint64_t path_index) {
  spec.validate();
  const double X = grid.length();
  const double h = grid.h();
  switch (spec.kind) {
    case InitialKind::sine: {
      const double k = spec.mode * std::numbers::pi / X;
      return GridFunction::from_function(
          grid, [&](double x) { return spec.amplitude * std::sin(k * x); });
    }
    case InitialKind::spike: {
      const double c = spec.center.value_or(0.5 * X);
      const double half = 0.5 * spec.width;
      const double ramp = spec.ramp > 0.0 ? spec.ramp : h;
      return GridFunction::from_function(grid, [&](double x) {
        const double d = std::abs(x - c);
        if (d <= half) return spec.amplitude;
        if (d < half + ramp) return spec.amplitude * (1.0 - (d - half) / ramp);
        return 0.0;
      });
    }
    case InitialKind::power_singularity: {
      // Capped at the value of the first interior node.
      const double cap = std::pow(h, -spec.alpha);
      return GridFunction::from_function(grid, [&](double x) {
        return spec.amplitude * std::min(std::pow(x, -spec.alpha), cap);
      });
    }
    case InitialKind::random_amplitude: {
      auto rng = make_stream(spec.seed, path_index, StreamTag::initial_datum);
      const double a = spec.amplitude * std::uniform_real_distribution<double>(0.5, 1.5)(rng);
      const double k = spec.mode * std::numbers::pi / X;
      return GridFunction::from_function(grid, [&](double x) { return a * std::sin(k * x); });
    }
  }
  throw_invalid("unknown initial datum kind");
}

GridFunction truncate_initial(const GridFunction& u0, double level) {
  require_positive(level, "truncation level n");
  return u0.map([level](double x) { return trunc(level, x); });
}

}  // namespace splap
