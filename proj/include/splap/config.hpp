#pragma once

// Experiment configuration: a flat `key = value` text format with dotted
// section names, e.g.
//
//   [grid]
//   n_cells = 64
//   time.dt = 1e-3        # dotted keys work outside sections too
//
// Lists are comma separated; renormalizers are written as calls such as
// `hk_delta(2, 0.5)`. The full key list with defaults is produced by
// ExperimentConfig{}.echo().

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "splap/initialdata.hpp"
#include "splap/mesh.hpp"
#include "splap/noise.hpp"
#include "splap/plap_step.hpp"
#include "splap/sde.hpp"
#include "splap/truncations.hpp"

namespace splap {

/// A catalog renormalizer by name and parameters, e.g. hk_delta(2, 0.5).
struct RenormSpec {
  std::string name = "hk_delta";
  std::vector<double> args = {2.0, 0.5};

  PiecewiseC2 build() const;
  std::string to_string() const;
  static RenormSpec parse(const std::string& text);
};

/// Test functions psi(t, x) with analytic time derivative.
enum class PsiKind { one, sin_growing, sin };

std::string_view to_string(PsiKind kind) noexcept;
std::optional<PsiKind> parse_psi_kind(std::string_view name) noexcept;

struct TestFunction {
  PsiKind kind;
  double length;
  double value(double t, double x) const;
  double time_derivative(double t, double x) const;
  /// True when psi(t, 0) = psi(t, X) = 0 for all t.
  bool vanishes_on_boundary() const noexcept { return kind != PsiKind::one; }
};

inline InitialSpec spike_datum(double height) {
  InitialSpec s;
  s.kind = InitialKind::spike;
  s.amplitude = height;
  return s;
}

inline InitialSpec sine_datum(double amplitude, int mode = 1) {
  InitialSpec s;
  s.amplitude = amplitude;
  s.mode = mode;
  return s;
}

struct LevelPair {
  double n = 2.0;
  double m = 8.0;
};

struct ExperimentConfig {
  // mesh and time grid
  std::size_t n_cells = 64;
  double length = 1.0;
  double T = 0.5;
  double dt = 1e-3;
  // scheme
  double p = 2.0;
  /// Empty means automatic (0 for p >= 2, 1e-6 times the datum gradient scale otherwise).
  std::optional<double> eps;
  SolverOptions solver;
  // data
  NoiseParams noise;
  InitialSpec u0 = spike_datum(5.0);
  InitialSpec v0 = sine_datum(1.0);
  // Monte Carlo
  std::uint64_t seed = 20240607;
  std::size_t n_paths = 200;
  std::size_t workers = 1;
  /// Brownian increments are drawn at dt / substeps and summed; lets runs at
  /// dt and dt/2 share one Brownian path.
  std::size_t brownian_substeps = 1;

  // estimator parameters and pass thresholds
  std::vector<double> k_levels = {0.5, 1.0, 2.0};
  std::vector<LevelPair> level_pairs = {{2.0, 8.0}, {4.0, 8.0}};
  double monotonicity_k = 1.0;

  std::vector<double> contraction_deltas = {0.1, 0.01};
  double contraction_slack_a = 0.6325;
  double contraction_slack_b = 3.0;
  bool contraction_refine = true;

  double energy_slack = 0.10;
  bool energy_refine = true;
  double stderr_factor = 3.0;

  int dissipation_k_max = 9;
  double dissipation_level = 8.0;
  double dissipation_ratio = 0.1;

  RenormSpec renorm_S{"hk_delta", {2.0, 0.5}};
  std::vector<PsiKind> psi = {PsiKind::one, PsiKind::sin_growing, PsiKind::sin};
  std::vector<double> refine_dts = {4e-3, 2e-3, 1e-3};
  double renorm_min_order = 0.4;
  double mean_sigmas = 4.0;

  RenormSpec product_H{"hk_delta", {3.0, 0.5}};
  RenormSpec product_Z{"trunc_primitive", {1.0}};
  RenormSpec hz_H{"hk_delta", {2.0, 0.5}};
  RenormSpec hz_Z{"normalized_hk_delta", {0.5, 2.0}};

  double cauchy_slack = 0.05;

  std::size_t heat_n_cells = 128;
  double heat_dt = 1e-4;
  double heat_T = 0.1;
  double heat_max_error = 2e-3;
  double heat_min_ratio = 1.8;

  bool export_trajectory = false;

  // derived
  Grid1D grid() const { return Grid1D(n_cells, length); }
  std::size_t steps() const;
  double eps_for(const GridFunction& datum) const;
  SchemeParams scheme_for(const GridFunction& datum) const;
  NoiseModel noise_model() const { return make_noise(noise); }

  /// Every violated invariant, each naming its key. Empty iff runnable.
  std::vector<std::string> violations() const;
  /// Canonical text that parses back to this configuration.
  std::string echo() const;
  /// Applies one `key = value` assignment; throws Error(config_error) on unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
};

/// Parses `text` collecting every malformed line and every violated
/// invariant instead of stopping at the first. Empty iff runnable.
std::vector<std::string> validate_config_text(const std::string& text);

}  // namespace splap
