#pragma once

// Monte Carlo harness and the verification estimators.
//
// Every estimator draws path i from (cfg.seed, i), evaluates its per-path
// observables, and reduces them in ascending path order with compensated
// summation, so results do not depend on cfg.workers.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "splap/config.hpp"
#include "splap/mesh.hpp"
#include "splap/sde.hpp"
#include "splap/truncations.hpp"

namespace splap {

struct MCResult {
  double mean = 0.0;
  /// Sample standard deviation over sqrt(n).
  double std_error = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean and standard error of `samples` in their given order. Needs n >= 2.
MCResult summarize(std::span<const double> samples, std::uint64_t seed);
/// sqrt(mean of squares).
double root_mean_square(std::span<const double> samples);

using PathObservables = std::function<std::vector<double>(std::uint64_t index)>;

/// Evaluates `observe` on paths 0..n_paths-1 using `workers` threads and
/// returns the per-path vectors indexed by path. If any path throws, the
/// failure with the smallest index is rethrown as PathFailure.
std::vector<std::vector<double>> run_paths(std::size_t n_paths, std::size_t workers,
                                           const PathObservables& observe);

/// Column `c` of the per-path table.
std::vector<double> column(const std::vector<std::vector<double>>& table, std::size_t c);

using PathExperiment = std::function<double(std::uint64_t master_seed, std::uint64_t index)>;

MCResult mc_expectation(const PathExperiment& experiment, std::size_t n_paths,
                        std::uint64_t master_seed, std::size_t workers = 1);

/// Brownian path `index` for cfg: drawn at step dt / brownian_substeps and
/// summed back to dt.
BrownianPath brownian_for(const ExperimentConfig& cfg, std::uint64_t index);

/// Copies of cfg at each time step in `dts`, all driven by the same Brownian
/// paths (sampled at the smallest step). Every step must be an integer
/// multiple of the smallest.
std::vector<ExperimentConfig> refinement_configs(const ExperimentConfig& cfg,
                                                 std::span<const double> dts);

// ---------------------------------------------------------------------------
// Contraction

struct ItoCorrectionBound {
  double delta = 0.0;
  /// delta * L^2 * T * X.
  double bound = 0.0;
  /// Largest pathwise value of sum_j dt h sum_i N''(u-v) (Phi(u) - Phi(v))^2.
  double max_observed = 0.0;
  std::size_t violations = 0;
};

struct ContractionResult {
  std::vector<double> times;
  /// E ||u(t_j) - v(t_j)||_1 per time.
  std::vector<MCResult> distance;
  /// Denominator E ||u0 - v0||_1 (the t = 0 mean).
  double initial_distance = 0.0;
  std::vector<double> ratio;
  std::vector<double> rel_stderr;
  std::size_t argmax = 0;
  double max_ratio = 0.0;
  /// max_ratio - 1, never negative since ratio(0) = 1.
  double excess = 0.0;
  /// Paths on which the distance increased at some step (beyond 1e-12 relative).
  std::size_t nonmonotone_paths = 0;
  std::vector<ItoCorrectionBound> ito;
  double dt = 0.0;
  double h = 0.0;
};

ContractionResult contraction_check(const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Energy and dissipation

struct EnergyBound {
  double k = 0.0;
  MCResult lhs;
  /// T L^2 k^2 X / 2 + k E||u0||_1.
  double C = 0.0;
};

struct EnergyResult {
  std::vector<EnergyBound> levels;
  MCResult total_energy;
  double u0_l1 = 0.0;
  double L = 0.0;
  double dt = 0.0;
  double h = 0.0;
};

/// C(k) for the given constants.
double energy_constant(double T, double L, double k, double length, double u0_l1);

EnergyResult energy_bound_check(const ExperimentConfig& cfg, std::span<const double> k_levels);

struct DissipationResult {
  std::vector<double> ks;
  /// D(k) = E sum_{j>=1} dt * levelset_gradient_integral(u^j, p, k, k+1).
  std::vector<MCResult> D;
  MCResult total_energy;
  /// max |u^j_i| over all paths, steps and nodes.
  double observed_max = 0.0;
  double dt = 0.0;
  double h = 0.0;
};

DissipationResult dissipation_profile(const ExperimentConfig& cfg, std::span<const double> ks);

// ---------------------------------------------------------------------------
// Renormalized equation

struct RenormResult {
  PsiKind psi = PsiKind::one;
  MCResult signed_residual;
  double rms = 0.0;
  /// Means of the individual terms: boundary, S''-term, flux-psi term,
  /// stochastic integral, psi_t term, Ito correction.
  std::vector<double> term_means;
  double dt = 0.0;
  double h = 0.0;
};

/// Throws invalid_argument when S'(0) != 0 and psi does not vanish on the boundary.
void check_renorm_admissible(const PiecewiseC2& S, const TestFunction& psi);

/// One entry per test function in `psi`, all evaluated on the same paths.
std::vector<RenormResult> renorm_residual(const ExperimentConfig& cfg, const PiecewiseC2& S,
                                          std::span<const PsiKind> psi);

/// Single-path residual; exposed for tests.
double renorm_path_residual(const Trajectory& traj, const NoiseModel& noise, double p, double eps,
                            const PiecewiseC2& S, const TestFunction& psi,
                            std::vector<double>* terms = nullptr);

struct RefinementStudy {
  std::vector<double> dts;
  std::vector<double> rms;
  std::vector<MCResult> signed_mean;
  /// Least-squares slope of log rms against log dt.
  double order = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Ito product rule

void check_product_pair(const PiecewiseC2& H, const PiecewiseC2& Z);

struct ProductResult {
  MCResult signed_residual;
  double rms = 0.0;
  double dt = 0.0;
  double h = 0.0;
};

ProductResult ito_product_residual(const ExperimentConfig& cfg, const PiecewiseC2& H,
                                   const PiecewiseC2& Z);

double product_path_residual(const Trajectory& u, const Trajectory& v, const NoiseModel& noise,
                             double p, double eps, const PiecewiseC2& H, const PiecewiseC2& Z);

// ---------------------------------------------------------------------------
// Truncation levels: Cauchy property, monotonicity gap, H-Z coupling term

struct LevelPairResult {
  LevelPair pair;
  /// E ||u_n(T) - u_m(T)||_1.
  MCResult cauchy_lhs;
  /// E ||T_n u0 - T_m u0||_1.
  double cauchy_rhs = 0.0;
  /// E sum_{j>=1} dt h sum_e (phi(D u_n) - phi(D u_m)) D T_k(u_n - u_m).
  MCResult monotonicity_gap;
  /// E sum_{j>=1} dt h sum_e H''(ubar_n) Z(ubar_n - ubar_m) |D u_n|^p.
  MCResult hz;
};

struct LevelStudy {
  std::vector<LevelPairResult> pairs;
  double k = 0.0;
  double dt = 0.0;
  double h = 0.0;
};

/// All truncation levels of `pairs` are evolved on one Brownian path per sample.
LevelStudy level_study(const ExperimentConfig& cfg, std::span<const LevelPair> pairs, double k,
                       const PiecewiseC2& H, const PiecewiseC2& Z);

struct CauchyResult {
  MCResult lhs;
  double rhs = 0.0;
};

CauchyResult cauchy_initial_check(const ExperimentConfig& cfg, double n, double m);
MCResult monotonicity_gap(const ExperimentConfig& cfg, double n, double m, double k);
MCResult hz_coupling_diagnostic(const ExperimentConfig& cfg, double n, double m,
                                const PiecewiseC2& H, const PiecewiseC2& Z);

// ---------------------------------------------------------------------------
// Deterministic heat equation

struct HeatResult {
  std::size_t n_cells = 0;
  double dt = 0.0;
  /// Relative discrete L2 error at T against exp(-pi^2 t / X^2) sin(pi x / X).
  double error = 0.0;
  std::size_t fine_n_cells = 0;
  double fine_dt = 0.0;
  double fine_error = 0.0;
  double ratio = 0.0;
};

/// p = 2, zero noise, at (heat_n_cells, heat_dt) and at twice the resolution in both.
HeatResult heat_convergence(const ExperimentConfig& cfg);

/// Relative L2 error of one run; exposed for tests.
double heat_error(std::size_t n_cells, double length, double dt, double T,
                  const SolverOptions& solver);

}  // namespace splap
