#pragma once

// Uniform 1-D mesh on (0, X) with homogeneous Dirichlet data.
//
// Nodes are 0..n_cells; only the interior nodes 1..n_cells-1 carry unknowns.
// Edge e (0..n_cells-1) joins nodes e and e+1. Gradients live on edges,
// values on nodes.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace splap {

class Grid1D {
 public:
  explicit Grid1D(std::size_t n_cells, double length = 1.0);

  std::size_t n_cells() const noexcept { return n_cells_; }
  std::size_t n_interior() const noexcept { return n_cells_ - 1; }
  std::size_t n_edges() const noexcept { return n_cells_; }
  double length() const noexcept { return length_; }
  double h() const noexcept { return h_; }
  /// Coordinate of node i, 0 <= i <= n_cells.
  double x(std::size_t node) const noexcept { return static_cast<double>(node) * h_; }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  std::size_t n_cells_;
  double length_;
  double h_;
};

/// Values on the interior nodes of a Grid1D; boundary values are implicitly 0.
class GridFunction {
 public:
  explicit GridFunction(const Grid1D& grid);  // zero field
  GridFunction(const Grid1D& grid, std::vector<double> values);
  /// Samples f at interior node coordinates.
  static GridFunction from_function(const Grid1D& grid, const std::function<double(double)>& f);

  const Grid1D& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values_mut() noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }

  /// Interior value at storage index i (node i + 1).
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  /// Value at node 0..n_cells including the zero boundary.
  double at_node(std::size_t node) const noexcept {
    return (node == 0 || node == grid_.n_cells()) ? 0.0 : values_[node - 1];
  }

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend bool operator==(const GridFunction&, const GridFunction&) = default;

  GridFunction map(const std::function<double(double)>& f) const;

 private:
  Grid1D grid_;
  std::vector<double> values_;
};

/// Regularized p-flux (s^2 + eps^2)^((p-2)/2) s. Rejects p <= 1 and the
/// singular configuration p < 2, eps = 0, s = 0.
double p_flux(double s, double p, double eps);

/// d/ds of p_flux; never called at the singular configuration.
double p_flux_derivative(double s, double p, double eps);

/// Checks (p, eps) admissibility once; throws invalid_argument otherwise.
void check_flux_parameters(double p, double eps);

/// Default regularization: 0 for p >= 2, 1e-6 * gradient_scale for 1 < p < 2.
double default_eps(double p, double gradient_scale = 1.0);

/// Forward differences on all n_cells edges, boundary nodes taken as 0.
std::vector<double> gradient(const GridFunction& u);
void gradient_into(std::span<const double> interior, double h, std::span<double> edges);

/// Node i: (phi(g_{i+1/2}) - phi(g_{i-1/2})) / h.
GridFunction p_laplacian(const GridFunction& u, double p, double eps);

/// h * sum_i f(u_i) over interior nodes (rectangle rule).
double integrate(const GridFunction& u, const std::function<double(double)>& f);
/// h * sum_i |u_i|.
double l1_norm(const GridFunction& u);
/// sqrt(h * sum_i u_i^2).
double l2_norm(const GridFunction& u);
double l2_norm(std::span<const double> values, double h);

/// h * sum_e 1{lo < |ubar_e| < hi} |g_e|^p with ubar_e the edge-midpoint value.
double levelset_gradient_integral(const GridFunction& u, double p, double lo, double hi);

/// h * sum_e |D_e(T_k(u))|^p, truncating nodewise before differencing.
double truncated_gradient_energy(const GridFunction& u, double k, double p);

/// h * sum_e |D_e u|^p.
double gradient_energy(const GridFunction& u, double p);

/// h * sum_e (phi(D_e u) - phi(D_e v)) (D_e u - D_e v); nonnegative by monotonicity.
double monotonicity_pairing(const GridFunction& u, const GridFunction& v, double p, double eps);

}  // namespace splap
