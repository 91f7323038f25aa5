#include "splap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "splap/error.hpp"

namespace splap {

Grid1D::Grid1D(std::size_t n_cells, double length) : n_cells_(n_cells), length_(length) {
  if (n_cells < 2) throw_invalid("grid needs n_cells >= 2");
  require_positive(length, "domain length X");
  h_ = length_ / static_cast<double>(n_cells_);
}

GridFunction::GridFunction(const Grid1D& grid) : grid_(grid), values_(grid.n_interior(), 0.0) {}

GridFunction::GridFunction(const Grid1D& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_interior()) {
    std::ostringstream os;
    os << "grid function needs " << grid_.n_interior() << " interior values, got "
       << values_.size();
    throw_invalid(os.str());
  }
  if (!all_finite()) throw_invalid("grid function values must be finite");
}

GridFunction GridFunction::from_function(const Grid1D& grid,
                                         const std::function<double(double)>& f) {
  std::vector<double> v(grid.n_interior());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.x(i + 1));
  return GridFunction(grid, std::move(v));
}

bool GridFunction::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

double GridFunction::max_abs() const noexcept {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  if (!(grid_ == other.grid_)) throw_invalid("grid functions live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  if (!(grid_ == other.grid_)) throw_invalid("grid functions live on different grids");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction GridFunction::map(const std::function<double(double)>& f) const {
  GridFunction out(grid_);
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] = f(values_[i]);
  return out;
}

// ---------------------------------------------------------------------------

void check_flux_parameters(double p, double eps) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << "p must exceed 1 (got " << p << ")";
    throw_invalid(os.str());
  }
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw_invalid("eps must be a nonnegative number");
}

double p_flux(double s, double p, double eps) {
  check_flux_parameters(p, eps);
  if (p < 2.0 && eps == 0.0 && s == 0.0) {
    throw_invalid("p-flux is singular at s = 0 for p < 2 without regularization");
  }
  if (p == 2.0) return s;
  const double q = s * s + eps * eps;
  if (p == 3.0) return std::sqrt(q) * s;
  if (p == 4.0) return q * s;
  return std::pow(q, 0.5 * (p - 2.0)) * s;
}

double p_flux_derivative(double s, double p, double eps) {
  if (p == 2.0) return 1.0;
  const double s2 = s * s;
  const double q = s2 + eps * eps;
  if (q == 0.0) return 0.0;  // p > 2, eps = 0, s = 0
  // (q)^((p-4)/2) ((p-1) s^2 + eps^2)
  if (p == 3.0) return (2.0 * s2 + eps * eps) / std::sqrt(q);
  if (p == 4.0) return 3.0 * s2 + eps * eps;
  return std::pow(q, 0.5 * (p - 4.0)) * ((p - 1.0) * s2 + eps * eps);
}

double default_eps(double p, double gradient_scale) {
  check_flux_parameters(p, 0.0);
  return p >= 2.0 ? 0.0 : 1e-6 * std::max(gradient_scale, 1e-300);
}

void gradient_into(std::span<const double> interior, double h, std::span<double> edges) {
  const std::size_t n = edges.size();
  const double inv_h = 1.0 / h;
  double left = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    const double right = (e + 1 < n) ? interior[e] : 0.0;
    edges[e] = (right - left) * inv_h;
    left = right;
  }
}

std::vector<double> gradient(const GridFunction& u) {
  std::vector<double> g(u.grid().n_edges());
  gradient_into(u.values(), u.grid().h(), g);
  return g;
}

GridFunction p_laplacian(const GridFunction& u, double p, double eps) {
  check_flux_parameters(p, eps);
  const auto g = gradient(u);
  const double h = u.grid().h();
  std::vector<double> flux(g.size());
  for (std::size_t e = 0; e < g.size(); ++e) flux[e] = p_flux(g[e], p, eps);
  GridFunction out(u.grid());
  auto v = out.values_mut();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (flux[i + 1] - flux[i]) / h;
  return out;
}

double integrate(const GridFunction& u, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (double x : u.values()) sum += f(x);
  return u.grid().h() * sum;
}

double l1_norm(const GridFunction& u) {
  double sum = 0.0;
  for (double x : u.values()) sum += std::abs(x);
  return u.grid().h() * sum;
}

double l2_norm(std::span<const double> values, double h) {
  double sum = 0.0;
  for (double x : values) sum += x * x;
  return std::sqrt(h * sum);
}

double l2_norm(const GridFunction& u) { return l2_norm(u.values(), u.grid().h()); }

namespace {

double abs_pow(double x, double p) {
  const double a = std::abs(x);
  if (p == 2.0) return a * a;
  if (p == 3.0) return a * a * a;
  return std::pow(a, p);
}

}  // namespace

double levelset_gradient_integral(const GridFunction& u, double p, double lo, double hi) {
  check_flux_parameters(p, 0.0);
  if (!(lo >= 0.0) || !(hi > lo)) throw_invalid("level band needs 0 <= lo < hi");
  const auto g = gradient(u);
  double sum = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) {
    const double mid = std::abs(0.5 * (u.at_node(e) + u.at_node(e + 1)));
    if (mid > lo && mid < hi) sum += abs_pow(g[e], p);
  }
  return u.grid().h() * sum;
}

double truncated_gradient_energy(const GridFunction& u, double k, double p) {
  require_positive(k, "truncation level k");
  check_flux_parameters(p, 0.0);
  return gradient_energy(u.map([k](double x) { return std::clamp(x, -k, k); }), p);
}

double gradient_energy(const GridFunction& u, double p) {
  check_flux_parameters(p, 0.0);
  const auto g = gradient(u);
  double sum = 0.0;
  for (double x : g) sum += abs_pow(x, p);
  return u.grid().h() * sum;
}

double monotonicity_pairing(const GridFunction& u, const GridFunction& v, double p, double eps) {
  check_flux_parameters(p, eps);
  const auto gu = gradient(u);
  const auto gv = gradient(v);
  double sum = 0.0;
  for (std::size_t e = 0; e < gu.size(); ++e) {
    sum += (p_flux(gu[e], p, eps) - p_flux(gv[e], p, eps)) * (gu[e] - gv[e]);
  }
  return u.grid().h() * sum;
}

}  // namespace splap
