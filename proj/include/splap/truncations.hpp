#pragma once

// Truncation and renormalizer functions with their first and second (weak)
// derivatives. Every function is piecewise C^2 with finitely many
// breakpoints. At a breakpoint the second derivative takes its right limit.

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace splap {

/// Value together with first and second derivative at one point.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// A real function assembled from closed-form pieces between ascending
/// breakpoints. Piece i covers [b_{i-1}, b_i), so n breakpoints need n+1 pieces.
class PiecewiseC2 {
 public:
  using Piece = std::function<Jet(double)>;

  PiecewiseC2(std::string name, std::vector<double> breakpoints, std::vector<Piece> pieces,
              double support_radius = kUnbounded);

  Jet operator()(double r) const;
  double value(double r) const { return (*this)(r).value; }
  double d1(double r) const { return (*this)(r).d1; }
  double d2(double r) const { return (*this)(r).d2; }

  const std::string& name() const noexcept { return name_; }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  /// Radius R with supp(d1) inside [-R, R]; kUnbounded when d1 is not compactly supported.
  double support_radius() const noexcept { return support_radius_; }

  /// Left and right one-sided evaluations at breakpoint i.
  Jet left_limit(std::size_t i) const;
  Jet right_limit(std::size_t i) const;

  /// Human-readable list of continuity violations: value jumps above `tol`
  /// at any breakpoint, d1 jumps above `tol` unless `allow_d1_jumps`.
  std::vector<std::string> continuity_violations(double tol = 1e-12,
                                                 bool allow_d1_jumps = false) const;

 private:
  std::string name_;
  std::vector<double> breakpoints_;
  std::vector<Piece> pieces_;
  double support_radius_;
};

// Scalar catalog. All of these reject non-positive parameters with
// Errc::invalid_argument.

/// Clamp of r to [-k, k].
double trunc(double k, double r);
/// Primitive of trunc(k, .) vanishing at 0: r^2/2 inside, k|r| - k^2/2 outside.
double trunc_primitive(double k, double r);
/// trunc(k + kp, r) - trunc(k, r).
double theta(double k, double kp, double r);
/// C^1 truncation whose slope ramps linearly from 1 at |r| = s to 0 at |r| = s + sigma.
Jet smooth_trunc(double s, double sigma, double r);
/// Plateau cutoff: 1 on |r| <= l, linear down to 0 at |r| = l + 1.
double plateau(double l, double r);
/// Primitive of plateau(l, .) vanishing at 0; saturates at +-(l + 1/2).
double plateau_primitive(double l, double r);
/// Smoothed absolute value: |r| outside (-delta, delta), r^2/(2 delta) + delta/2 inside.
Jet abs_smooth(double delta, double r);
/// Function with second derivative 1 on |r| < k, -k*delta on k <= |r| <= k + 1/delta,
/// 0 beyond; normalized by H(0) = H'(0) = 0. Its first derivative is a compact hat.
Jet hk_delta(double k, double delta, double r);
/// trunc(k, r) / k, a Lipschitz approximation of sign(r).
double sign_approx(double k, double r);

// The same functions as PiecewiseC2 objects, used as renormalizers.
namespace catalog {

PiecewiseC2 trunc(double k);
PiecewiseC2 trunc_primitive(double k);
PiecewiseC2 smooth_trunc(double s, double sigma);
PiecewiseC2 plateau_primitive(double l);
PiecewiseC2 abs_smooth(double delta);
PiecewiseC2 hk_delta(double k, double delta);
/// hk_delta(k, delta) divided by its saturation value: 0 at the origin with
/// zero slope, identically 1 for |r| >= k + 1/delta.
PiecewiseC2 normalized_hk_delta(double k, double delta);
/// The identity map (unbounded support). Mostly useful in tests.
PiecewiseC2 identity();

}  // namespace catalog

}  // namespace splap
