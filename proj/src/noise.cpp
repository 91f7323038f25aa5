#include "splap/noise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "splap/error.hpp"

namespace splap {

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::zero: return "zero";
    case NoiseKind::bounded_trunc: return "bounded_trunc";
    case NoiseKind::linear: return "linear";
    case NoiseKind::sinusoidal: return "sinusoidal";
    case NoiseKind::time_modulated: return "time_modulated";
    case NoiseKind::custom: return "custom";
  }
  return "unknown";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view name) noexcept {
  for (NoiseKind k : {NoiseKind::zero, NoiseKind::bounded_trunc, NoiseKind::linear,
                      NoiseKind::sinusoidal, NoiseKind::time_modulated}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

NoiseModel NoiseModel::zero() {
  return NoiseModel(NoiseKind::zero, 0.0, 0.0, "zero", [](double, double) { return 0.0; });
}

NoiseModel NoiseModel::custom(Evaluator phi, double L, std::optional<double> M,
                              std::string label) {
  return NoiseModel(NoiseKind::custom, L, M, std::move(label), std::move(phi));
}

NoiseModel NoiseModel::make(const NoiseParams& params) {
  const double L = params.L;
  const double M = params.M;
  std::ostringstream label;
  label << to_string(params.kind);
  switch (params.kind) {
    case NoiseKind::zero:
      return zero();
    case NoiseKind::linear: {
      require_positive(L, "noise Lipschitz constant L");
      label << "(L=" << L << ")";
      return NoiseModel(params.kind, L, std::nullopt, label.str(),
                        [L](double, double x) { return L * x; });
    }
    case NoiseKind::bounded_trunc: {
      require_positive(L, "noise Lipschitz constant L");
      require_positive(M, "noise bound M");
      const double level = M / L;
      label << "(L=" << L << ",M=" << M << ")";
      return NoiseModel(params.kind, L, M, label.str(),
                        [L, level](double, double x) { return L * std::clamp(x, -level, level); });
    }
    case NoiseKind::sinusoidal: {
      require_positive(L, "noise Lipschitz constant L");
      require_positive(M, "noise bound M");
      label << "(L=" << L << ",M=" << M << ")";
      return NoiseModel(params.kind, L, M, label.str(),
                        [L, M](double, double x) { return M * std::sin(L * x / M); });
    }
    case NoiseKind::time_modulated: {
      require_positive(L, "noise Lipschitz constant L");
      require_positive(M, "noise bound M");
      if (!std::isfinite(params.omega) || !std::isfinite(params.phase)) {
        throw_invalid("time_modulated noise needs finite omega and phase");
      }
      const double level = M / L;
      const double omega = params.omega;
      const double phase = params.phase;
      label << "(L=" << L << ",M=" << M << ",omega=" << omega << ",phase=" << phase << ")";
      return NoiseModel(params.kind, L, M, label.str(), [=](double t, double x) {
        return std::sin(omega * t + phase) * L * std::clamp(x, -level, level);
      });
    }
    case NoiseKind::custom:
      break;
  }
  throw_invalid("make_noise: custom models need NoiseModel::custom");
}

NoiseModel make_noise(const NoiseParams& params) { return NoiseModel::make(params); }

NoiseReport validate_noise(const NoiseModel& model, std::size_t samples, double radius,
                           std::uint64_t seed, double t_max, std::size_t max_witnesses) {
  if (samples == 0) throw_invalid("validate_noise needs a positive sample count");
  require_positive(radius, "validation radius");
  if (!(t_max >= 0.0)) throw_invalid("validate_noise needs t_max >= 0");

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  const double L = model.lipschitz();
  const auto M = model.bound();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> time(0.0, t_max);
  std::uniform_real_distribution<double> wide(-radius, radius);
  std::uniform_real_distribution<double> near(-1.0, 1.0);
  const double local = std::min(1.0, radius);

  NoiseReport report;
  report.samples = samples;
  auto record = [&](NoiseViolation v) {
    ++report.violation_count;
    if (report.violations.size() < max_witnesses) report.violations.push_back(v);
  };

  for (std::size_t s = 0; s < samples; ++s) {
    const double t = time(rng);
    const double a = wide(rng);
    // Alternate far pairs with close pairs so both global and local slopes are probed.
    const double b = (s % 2 == 0) ? wide(rng) : a + local * near(rng);

    const double at_origin = model(t, 0.0);
    if (at_origin != 0.0) {
      record({NoiseViolation::Kind::nonzero_at_origin, t, 0.0, 0.0, std::abs(at_origin)});
    }
    const double fa = model(t, a);
    const double fb = model(t, b);
    if (M && std::abs(fa) > *M * (1.0 + 1e-12)) {
      record({NoiseViolation::Kind::bound, t, a, a, std::abs(fa)});
    }
    const double gap = std::abs(a - b);
    if (gap <= 1e-9 * std::max(1.0, std::abs(a))) continue;
    const double quotient = std::abs(fa - fb) / gap;
    report.max_quotient = std::max(report.max_quotient, quotient);
    // Relative slack on L plus the rounding error of the two evaluations.
    const double allowed = L * (1.0 + 1e-12) + 4.0 * kEps * (std::abs(fa) + std::abs(fb)) / gap;
    if (quotient > allowed) record({NoiseViolation::Kind::lipschitz, t, a, b, quotient});
  }
  return report;
}

}  // namespace splap
