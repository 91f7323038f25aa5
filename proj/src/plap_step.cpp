#include "splap/plap_step.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "splap/error.hpp"

namespace splap {

void SolverOptions::validate() const {
  require_positive(grad_tol, "solver grad_tol");
  if (max_iter < 1) throw_invalid("solver max_iter must be at least 1");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw_invalid("solver armijo_c must lie in (0, 1)");
  if (!(backtrack > 0.0 && backtrack < 1.0)) throw_invalid("solver backtrack must lie in (0, 1)");
}

Resolvent::Resolvent(const Grid1D& grid, double dt, double p, double eps, SolverOptions opts)
    : grid_(grid), dt_(dt), p_(p), eps_(eps), opts_(opts) {
  require_positive(dt, "time step dt");
  check_flux_parameters(p, eps);
  if (p < 2.0 && eps == 0.0) throw_invalid("p < 2 requires eps > 0 in the implicit step");
  opts_.validate();
  const std::size_t n = grid_.n_interior();
  edges_.resize(grid_.n_edges());
  res_.resize(n);
  dir_.resize(n);
  trial_.resize(n);
  diag_.resize(n);
  off_.resize(n);
  scratch_.resize(n);
}

double Resolvent::flux(double s) const {
  if (p_ == 2.0) return s;
  const double q = s * s + eps_ * eps_;
  if (p_ == 3.0) return std::sqrt(q) * s;
  if (p_ == 4.0) return q * s;
  return std::pow(q, 0.5 * (p_ - 2.0)) * s;
}

double Resolvent::flux_slope(double s) const { return p_flux_derivative(s, p_, eps_); }

double Resolvent::edge_energy(double s) const {
  const double q = s * s + eps_ * eps_;
  if (p_ == 2.0) return 0.5 * q;
  if (p_ == 3.0) return q * std::sqrt(q) / 3.0;
  if (p_ == 4.0) return 0.25 * q * q;
  return std::pow(q, 0.5 * p_) / p_;
}

void Resolvent::residual(std::span<const double> w, std::span<const double> g,
                         std::span<double> out) {
  const double h = grid_.h();
  gradient_into(w, h, edges_);
  const double c = dt_ / h;
  double left = flux(edges_[0]);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double right = flux(edges_[i + 1]);
    out[i] = w[i] - g[i] - c * (right - left);
    left = right;
  }
}

double Resolvent::objective(std::span<const double> w, std::span<const double> g) {
  const double h = grid_.h();
  gradient_into(w, h, edges_);
  double mass = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mass += (w[i] - g[i]) * (w[i] - g[i]);
  double energy = 0.0;
  for (double s : edges_) energy += edge_energy(s);
  return h * (0.5 * mass + dt_ * energy);
}

StepStats Resolvent::solve(std::span<const double> g, std::span<double> w) {
  const std::size_t n = grid_.n_interior();
  if (g.size() != n || w.size() != n) throw_invalid("resolvent: size mismatch with grid");
  const double h = grid_.h();
  const double tol = opts_.grad_tol * (1.0 + l2_norm(g, h));
  const double scale = dt_ / (h * h);

  std::copy(g.begin(), g.end(), w.begin());
  StepStats stats;
  residual(w, g, res_);
  double rnorm = l2_norm(res_, h);
  double j_cur = objective(w, g);

  for (int it = 0; it < opts_.max_iter; ++it) {
    if (rnorm <= tol) {
      stats.residual = rnorm;
      return stats;
    }
    ++stats.iterations;

    // Newton system (I + dt/h^2 * K(w)) dir = -res, K tridiagonal from flux slopes.
    gradient_into(w, h, edges_);
    for (std::size_t i = 0; i < n; ++i) {
      const double cl = flux_slope(edges_[i]);
      const double cr = flux_slope(edges_[i + 1]);
      diag_[i] = 1.0 + scale * (cl + cr);
      off_[i] = -scale * cr;  // couples i and i+1
    }
    // Thomas elimination.
    scratch_[0] = off_[0] / diag_[0];
    dir_[0] = -res_[0] / diag_[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = diag_[i] - off_[i - 1] * scratch_[i - 1];
      scratch_[i] = off_[i] / m;
      dir_[i] = (-res_[i] - off_[i - 1] * dir_[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) dir_[i] -= scratch_[i] * dir_[i + 1];

    // Directional derivative of J along dir is h * <res, dir>.
    double slope = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      slope += res_[i] * dir_[i];
      finite = finite && std::isfinite(dir_[i]);
    }
    slope *= h;
    if (!finite || !(slope < 0.0)) {
      ++stats.gradient_fallbacks;
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dir_[i] = -res_[i];
        slope -= res_[i] * res_[i];
      }
      slope *= h;
    }

    // Below this size a predicted decrease of J is lost in rounding, so the
    // Armijo test can no longer be trusted.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(j_cur) + 1e-300);
    double alpha = 1.0;
    double j_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < 60 && alpha * -slope > floor; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial_[i] = w[i] + alpha * dir_[i];
      j_trial = objective(trial_, g);
      if (j_trial <= j_cur + opts_.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opts_.backtrack;
    }
    if (!accepted) {
      // Near the minimizer J stops resolving the decrease; fall back to the
      // full step whenever it still reduces the optimality residual.
      for (std::size_t i = 0; i < n; ++i) trial_[i] = w[i] + dir_[i];
      residual(trial_, g, scratch_);
      const double trial_norm = l2_norm(scratch_, h);
      if (!(trial_norm < rnorm)) {
        std::ostringstream os;
        os << "implicit step: line search stalled at iteration " << it << " with residual "
           << rnorm << " (tolerance " << tol << ")";
        throw SolverFailure(os.str(), std::vector<double>(w.begin(), w.end()), rnorm);
      }
      j_trial = objective(trial_, g);
    }
    std::copy(trial_.begin(), trial_.end(), w.begin());
    j_cur = j_trial;
    residual(w, g, res_);
    rnorm = l2_norm(res_, h);
  }
  if (rnorm <= tol) {
    stats.residual = rnorm;
    return stats;
  }
  std::ostringstream os;
  os << "implicit step: no convergence after " << opts_.max_iter << " iterations, residual "
     << rnorm << " (tolerance " << tol << ")";
  throw SolverFailure(os.str(), std::vector<double>(w.begin(), w.end()), rnorm);
}

GridFunction Resolvent::operator()(const GridFunction& g, StepStats* stats) {
  if (!(g.grid() == grid_)) throw_invalid("resolvent: data lives on a different grid");
  std::vector<double> w(g.size());
  const StepStats s = solve(g.values(), w);
  if (stats) *stats = s;
  return GridFunction(grid_, std::move(w));
}

GridFunction implicit_step(const GridFunction& g, double dt, double p, double eps,
                           const SolverOptions& opts, StepStats* stats) {
  Resolvent solver(g.grid(), dt, p, eps, opts);
  return solver(g, stats);
}

double step_residual(const GridFunction& w, const GridFunction& g, double dt, double p,
                     double eps) {
  if (!(w.grid() == g.grid())) throw_invalid("step_residual: grids differ");
  const GridFunction lap = p_laplacian(w, p, eps);
  std::vector<double> r(w.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = w[i] - dt * lap[i] - g[i];
  return l2_norm(r, w.grid().h());
}

double step_objective(const GridFunction& w, const GridFunction& g, double dt, double p,
                      double eps) {
  if (!(w.grid() == g.grid())) throw_invalid("step_objective: grids differ");
  check_flux_parameters(p, eps);
  const auto edges = gradient(w);
  const double h = w.grid().h();
  double mass = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mass += (w[i] - g[i]) * (w[i] - g[i]);
  double energy = 0.0;
  for (double s : edges) energy += std::pow(s * s + eps * eps, 0.5 * p);
  return h * (0.5 * mass + dt / p * energy);
}

}  // namespace splap
