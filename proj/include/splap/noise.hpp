#pragma once

// Noise coefficients Phi(t, lambda) for du - Lap_p(u) dt = Phi(u) dbeta.
// Models are deterministic in (t, lambda), vanish at lambda = 0 and carry a
// declared Lipschitz constant L (and a sup bound M for the bounded kinds).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace splap {

enum class NoiseKind { zero, bounded_trunc, linear, sinusoidal, time_modulated, custom };

std::string_view to_string(NoiseKind kind) noexcept;
std::optional<NoiseKind> parse_noise_kind(std::string_view name) noexcept;

struct NoiseParams {
  NoiseKind kind = NoiseKind::bounded_trunc;
  double L = 1.0;
  /// Sup bound; ignored for linear and zero.
  double M = 2.0;
  /// time_modulated: c(t) = sin(omega t + phase) multiplies a bounded_trunc base.
  double omega = 1.0;
  double phase = 0.0;
};

class NoiseModel {
 public:
  using Evaluator = std::function<double(double t, double lambda)>;

  /// Validated construction of a shipped model.
  static NoiseModel make(const NoiseParams& params);
  static NoiseModel zero();
  /// Arbitrary evaluator with declared constants; no validation is done here.
  static NoiseModel custom(Evaluator phi, double L, std::optional<double> M, std::string label);

  double operator()(double t, double lambda) const { return eval_(t, lambda); }

  NoiseKind kind() const noexcept { return kind_; }
  double lipschitz() const noexcept { return L_; }
  /// Declared sup bound, empty for unbounded models.
  std::optional<double> bound() const noexcept { return M_; }
  const std::string& label() const noexcept { return label_; }
  bool is_zero() const noexcept { return kind_ == NoiseKind::zero; }

 private:
  NoiseModel(NoiseKind kind, double L, std::optional<double> M, std::string label, Evaluator eval)
      : kind_(kind), L_(L), M_(M), label_(std::move(label)), eval_(std::move(eval)) {}

  NoiseKind kind_;
  double L_;
  std::optional<double> M_;
  std::string label_;
  Evaluator eval_;
};

NoiseModel make_noise(const NoiseParams& params);

struct NoiseViolation {
  enum class Kind { nonzero_at_origin, lipschitz, bound } kind;
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
  /// Offending |Phi(t,0)|, Lipschitz quotient, or |Phi(t,a)|.
  double observed = 0.0;
};

struct NoiseReport {
  std::size_t samples = 0;
  double max_quotient = 0.0;
  /// Total number of violations; only the first few are kept as witnesses.
  std::size_t violation_count = 0;
  std::vector<NoiseViolation> violations;
  bool ok() const noexcept { return violation_count == 0; }
};

/// Samples t in [0, t_max] and pairs (a, b) in [-radius, radius] and checks
/// Phi(t,0) = 0, the Lipschitz bound and (if declared) the sup bound.
/// At most `max_witnesses` violations are recorded.
NoiseReport validate_noise(const NoiseModel& model, std::size_t samples, double radius,
                           std::uint64_t seed, double t_max = 10.0,
                           std::size_t max_witnesses = 16);

}  // namespace splap
