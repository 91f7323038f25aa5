#pragma once

// Brownian increments and the semi-implicit Euler-Maruyama scheme
//
//   g^j     = u^j + Phi(t_j, u^j) * dbeta_j        (explicit, nodewise)
//   u^{j+1} = (I - dt Lap_p)^{-1} g^j              (implicit resolvent)
//
// One real Brownian motion drives every node.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "splap/mesh.hpp"
#include "splap/noise.hpp"
#include "splap/plap_step.hpp"

namespace splap {

/// Stream tags keep independent uses of one (seed, index) pair apart.
enum class StreamTag : std::uint32_t { brownian = 1, initial_datum = 2 };

/// Deterministic generator for (master seed, index, tag). The stream is
/// std::mt19937_64 seeded through std::seed_seq with the five 32-bit words
/// (seed lo, seed hi, index lo, index hi, tag).
std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag);

struct BrownianPath {
  double dt = 0.0;
  std::vector<double> increments;
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;

  std::size_t steps() const noexcept { return increments.size(); }
  /// beta(t_J) = sum of all increments.
  double terminal_value() const;
  /// Sums consecutive blocks of `factor` increments (the same path on a grid
  /// with step factor * dt).
  BrownianPath coarsen(std::size_t factor) const;
};

/// Increments i.i.d. N(0, dt) drawn with std::normal_distribution from make_stream.
BrownianPath sample_brownian(std::uint64_t master_seed, std::uint64_t path_index, std::size_t steps,
                             double dt);

struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> states;
  BrownianPath path;

  std::size_t steps() const noexcept { return path.steps(); }
  const GridFunction& final_state() const { return states.back(); }
};

struct SchemeParams {
  double p = 2.0;
  double eps = 0.0;
  SolverOptions solver;
};

/// Runs the scheme along `path`. Solver failures are rethrown with the step index.
Trajectory evolve(const GridFunction& u0, const NoiseModel& noise, const BrownianPath& path,
                  const SchemeParams& scheme);

/// Evolves several data along one path in lockstep (synchronous coupling of all of them).
std::vector<Trajectory> evolve_group(const std::vector<GridFunction>& initial,
                                     const NoiseModel& noise, const BrownianPath& path,
                                     const SchemeParams& scheme);

/// Synchronous coupling: both data driven by the same increments.
std::pair<Trajectory, Trajectory> evolve_coupled(const GridFunction& u0, const GridFunction& v0,
                                                 const NoiseModel& noise, const BrownianPath& path,
                                                 const SchemeParams& scheme);

/// Left-endpoint Ito sum  sum_j f(u^j, t_j) * dbeta_j.
double ito_integral(const Trajectory& traj,
                    const std::function<double(const GridFunction&, double)>& integrand);

}  // namespace splap
