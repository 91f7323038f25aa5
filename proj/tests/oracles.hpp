#pragma once

// Reference computations written independently of the library.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

/// Composite Simpson rule on [a, b] with 2n panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  const double h = (b - a) / (2 * n);
  double s = f(a) + f(b);
  for (int i = 1; i < 2 * n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Root of a continuous f with a sign change on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Dense Gaussian elimination with partial pivoting; A is row major n x n.
inline std::vector<double> gauss_solve(std::vector<double> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c])) piv = r;
    }
    for (std::size_t k = 0; k < n; ++k) std::swap(A[c * n + k], A[piv * n + k]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double m = A[r * n + c] / A[c * n + c];
      for (std::size_t k = c; k < n; ++k) A[r * n + k] -= m * A[c * n + k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= A[r * n + k] * x[k];
    x[r] = s / A[r * n + r];
  }
  return x;
}

/// Backward Euler for the p = 2 heat equation in the sine-mode basis: mode m
/// of the discrete Dirichlet Laplacian has eigenvalue -(4/h^2) sin^2(m pi h / 2X).
inline double discrete_heat_factor(int mode, std::size_t n_cells, double X, double dt, int steps) {
  const double h = X / static_cast<double>(n_cells);
  const double s = std::sin(mode * M_PI * h / (2.0 * X));
  const double lambda = 4.0 / (h * h) * s * s;
  return std::pow(1.0 / (1.0 + dt * lambda), steps);
}

}  // namespace oracle
