#pragma once

// One backward-Euler p-Laplace step, solved as the strictly convex problem
//
//   min_w  1/2 h sum_i (w_i - g_i)^2 + dt/p h sum_e ((D_e w)^2 + eps^2)^(p/2)
//
// whose optimality condition is w - dt * p_laplacian(w) = g.

#include <span>
#include <vector>

#include "splap/mesh.hpp"

namespace splap {

struct SolverOptions {
  /// Stop when ||w - dt*Lap_p(w) - g|| <= grad_tol * (1 + ||g||) in the discrete L2 norm.
  double grad_tol = 1e-10;
  int max_iter = 50;
  double armijo_c = 1e-4;
  double backtrack = 0.5;

  void validate() const;
};

struct StepStats {
  int iterations = 0;
  int gradient_fallbacks = 0;
  double residual = 0.0;
};

/// Reusable solver for a fixed (grid, dt, p, eps); holds its own scratch
/// buffers, so one instance must not be shared between threads.
class Resolvent {
 public:
  Resolvent(const Grid1D& grid, double dt, double p, double eps, SolverOptions opts = {});

  /// Solves for w given g; `w` may alias nothing. Throws SolverFailure.
  StepStats solve(std::span<const double> g, std::span<double> w);
  GridFunction operator()(const GridFunction& g, StepStats* stats = nullptr);

  const Grid1D& grid() const noexcept { return grid_; }
  double dt() const noexcept { return dt_; }
  double p() const noexcept { return p_; }
  double eps() const noexcept { return eps_; }

  /// Objective and its Euclidean gradient (h * residual) at w.
  double objective(std::span<const double> w, std::span<const double> g);
  void residual(std::span<const double> w, std::span<const double> g, std::span<double> out);

 private:
  double flux(double s) const;
  double flux_slope(double s) const;
  double edge_energy(double s) const;

  Grid1D grid_;
  double dt_, p_, eps_;
  SolverOptions opts_;
  std::vector<double> edges_, res_, dir_, trial_, diag_, off_, scratch_;
};

GridFunction implicit_step(const GridFunction& g, double dt, double p, double eps,
                           const SolverOptions& opts = {}, StepStats* stats = nullptr);

/// ||w - dt * p_laplacian(w) - g|| in the discrete L2 norm.
double step_residual(const GridFunction& w, const GridFunction& g, double dt, double p, double eps);

/// The minimized objective J(w) for data g.
double step_objective(const GridFunction& w, const GridFunction& g, double dt, double p, double eps);

}  // namespace splap
