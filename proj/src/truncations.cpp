#include "splap/truncations.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "splap/error.hpp"

namespace splap {

namespace {

double sgn(double r) { return (r > 0.0) - (r < 0.0); }

}  // namespace

PiecewiseC2::PiecewiseC2(std::string name, std::vector<double> breakpoints,
                         std::vector<Piece> pieces, double support_radius)
    : name_(std::move(name)),
      breakpoints_(std::move(breakpoints)),
      pieces_(std::move(pieces)),
      support_radius_(support_radius) {
  if (pieces_.size() != breakpoints_.size() + 1) {
    throw_invalid("PiecewiseC2 '" + name_ + "': need one more piece than breakpoints");
  }
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()) ||
      std::adjacent_find(breakpoints_.begin(), breakpoints_.end()) != breakpoints_.end()) {
    throw_invalid("PiecewiseC2 '" + name_ + "': breakpoints must be strictly ascending");
  }
  if (!(support_radius_ > 0.0)) {
    throw_invalid("PiecewiseC2 '" + name_ + "': support radius must be positive");
  }
}

Jet PiecewiseC2::operator()(double r) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
  return pieces_[static_cast<std::size_t>(it - breakpoints_.begin())](r);
}

Jet PiecewiseC2::left_limit(std::size_t i) const { return pieces_.at(i)(breakpoints_.at(i)); }

Jet PiecewiseC2::right_limit(std::size_t i) const {
  return pieces_.at(i + 1)(breakpoints_.at(i));
}

std::vector<std::string> PiecewiseC2::continuity_violations(double tol,
                                                            bool allow_d1_jumps) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const Jet l = left_limit(i);
    const Jet r = right_limit(i);
    const double scale = std::max({1.0, std::abs(l.value), std::abs(r.value)});
    if (std::abs(l.value - r.value) > tol * scale) {
      std::ostringstream os;
      os << name_ << ": value jumps by " << (r.value - l.value) << " at r = " << breakpoints_[i];
      out.push_back(os.str());
    }
    if (!allow_d1_jumps && std::abs(l.d1 - r.d1) > tol * std::max(1.0, std::abs(l.d1))) {
      std::ostringstream os;
      os << name_ << ": d1 jumps by " << (r.d1 - l.d1) << " at r = " << breakpoints_[i];
      out.push_back(os.str());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar catalog

double trunc(double k, double r) {
  require_positive(k, "truncation level k");
  return std::clamp(r, -k, k);
}

double trunc_primitive(double k, double r) {
  require_positive(k, "truncation level k");
  const double a = std::abs(r);
  return a <= k ? 0.5 * r * r : k * a - 0.5 * k * k;
}

double theta(double k, double kp, double r) {
  require_positive(k, "truncation level k");
  require_positive(kp, "band width k'");
  return trunc(k + kp, r) - trunc(k, r);
}

Jet smooth_trunc(double s, double sigma, double r) {
  require_positive(s, "level s");
  require_positive(sigma, "ramp width sigma");
  const double outer = s + sigma;
  const double top = s + 0.5 * sigma;
  // Interval tests on r (not |r|) give right limits at every breakpoint.
  if (r < -outer) return {-top, 0.0, 0.0};
  if (r < -s) {
    const double g = outer + r;
    return {-(top - g * g / (2.0 * sigma)), g / sigma, 1.0 / sigma};
  }
  if (r < s) return {r, 1.0, 0.0};
  if (r < outer) {
    const double g = outer - r;
    return {top - g * g / (2.0 * sigma), g / sigma, -1.0 / sigma};
  }
  return {top, 0.0, 0.0};
}

double plateau(double l, double r) {
  require_positive(l, "plateau level l");
  const double a = std::abs(r);
  if (a <= l) return 1.0;
  if (a < l + 1.0) return l + 1.0 - a;
  return 0.0;
}

double plateau_primitive(double l, double r) {
  require_positive(l, "plateau level l");
  const double a = std::abs(r);
  if (a <= l) return r;
  if (a < l + 1.0) {
    const double gap = l + 1.0 - a;
    return sgn(r) * (l + 0.5 * (1.0 - gap * gap));
  }
  return sgn(r) * (l + 0.5);
}

Jet abs_smooth(double delta, double r) {
  require_positive(delta, "smoothing width delta");
  if (r >= -delta && r < delta) return {r * r / (2.0 * delta) + 0.5 * delta, r / delta, 1.0 / delta};
  return {std::abs(r), sgn(r), 0.0};
}

Jet hk_delta(double k, double delta, double r) {
  require_positive(k, "level k");
  require_positive(delta, "slope delta");
  const double outer = k + 1.0 / delta;
  const double top = 0.5 * k * k + k / (2.0 * delta);
  if (r < -outer || r >= outer) return {top, 0.0, 0.0};
  if (r >= -k && r < k) return {0.5 * r * r, r, 1.0};
  const double e = std::abs(r) - k;
  return {0.5 * k * k + k * e - 0.5 * k * delta * e * e, sgn(r) * (k - k * delta * e),
          -k * delta};
}

double sign_approx(double k, double r) { return trunc(k, r) / k; }

// ---------------------------------------------------------------------------
// PiecewiseC2 catalog. Pieces are written per interval, independently of the
// branchy scalar versions above.

namespace catalog {

PiecewiseC2 trunc(double k) {
  require_positive(k, "truncation level k");
  return PiecewiseC2("trunc", {-k, k},
                     {[k](double) { return Jet{-k, 0.0, 0.0}; },
                      [](double r) { return Jet{r, 1.0, 0.0}; },
                      [k](double) { return Jet{k, 0.0, 0.0}; }},
                     k);
}

PiecewiseC2 trunc_primitive(double k) {
  require_positive(k, "truncation level k");
  return PiecewiseC2("trunc_primitive", {-k, k},
                     {[k](double r) { return Jet{-k * r - 0.5 * k * k, -k, 0.0}; },
                      [](double r) { return Jet{0.5 * r * r, r, 1.0}; },
                      [k](double r) { return Jet{k * r - 0.5 * k * k, k, 0.0}; }});
}

PiecewiseC2 smooth_trunc(double s, double sigma) {
  require_positive(s, "level s");
  require_positive(sigma, "ramp width sigma");
  const double top = s + 0.5 * sigma;
  const double outer = s + sigma;
  return PiecewiseC2(
      "smooth_trunc", {-outer, -s, s, outer},
      {[top](double) { return Jet{-top, 0.0, 0.0}; },
       [=](double r) {
         const double g = outer + r;
         return Jet{g * g / (2.0 * sigma) - top, g / sigma, 1.0 / sigma};
       },
       [](double r) { return Jet{r, 1.0, 0.0}; },
       [=](double r) {
         const double g = outer - r;
         return Jet{top - g * g / (2.0 * sigma), g / sigma, -1.0 / sigma};
       },
       [top](double) { return Jet{top, 0.0, 0.0}; }},
      outer);
}

PiecewiseC2 plateau_primitive(double l) {
  require_positive(l, "plateau level l");
  const double top = l + 0.5;
  const double outer = l + 1.0;
  return PiecewiseC2(
      "plateau_primitive", {-outer, -l, l, outer},
      {[top](double) { return Jet{-top, 0.0, 0.0}; },
       [=](double r) {
         const double g = outer + r;
         return Jet{0.5 * g * g - top, g, 1.0};
       },
       [](double r) { return Jet{r, 1.0, 0.0}; },
       [=](double r) {
         const double g = outer - r;
         return Jet{top - 0.5 * g * g, g, -1.0};
       },
       [top](double) { return Jet{top, 0.0, 0.0}; }},
      outer);
}

PiecewiseC2 abs_smooth(double delta) {
  require_positive(delta, "smoothing width delta");
  return PiecewiseC2("abs_smooth", {-delta, delta},
                     {[](double r) { return Jet{-r, -1.0, 0.0}; },
                      [delta](double r) {
                        return Jet{0.5 * (r * r / delta + delta), r / delta, 1.0 / delta};
                      },
                      [](double r) { return Jet{r, 1.0, 0.0}; }});
}

namespace {

PiecewiseC2 scaled_hk(std::string name, double k, double delta, double scale) {
  const double outer = k + 1.0 / delta;
  const double top = (0.5 * k * k + 0.5 * k / delta) * scale;
  const double kd = k * delta;
  // In the band, with q = outer - |r|: H' = kd * q and H = top - kd q^2 / 2.
  return PiecewiseC2(
      std::move(name), {-outer, -k, k, outer},
      {[top](double) { return Jet{top, 0.0, 0.0}; },
       [=](double r) {
         const double q = outer + r;
         return Jet{top - 0.5 * kd * q * q * scale, -kd * q * scale, -kd * scale};
       },
       [scale](double r) { return Jet{0.5 * r * r * scale, r * scale, scale}; },
       [=](double r) {
         const double q = outer - r;
         return Jet{top - 0.5 * kd * q * q * scale, kd * q * scale, -kd * scale};
       },
       [top](double) { return Jet{top, 0.0, 0.0}; }},
      outer);
}

}  // namespace

PiecewiseC2 hk_delta(double k, double delta) {
  require_positive(k, "level k");
  require_positive(delta, "slope delta");
  return scaled_hk("hk_delta", k, delta, 1.0);
}

PiecewiseC2 normalized_hk_delta(double k, double delta) {
  require_positive(k, "level k");
  require_positive(delta, "slope delta");
  return scaled_hk("normalized_hk_delta", k, delta, 1.0 / (0.5 * k * k + 0.5 * k / delta));
}

PiecewiseC2 identity() {
  return PiecewiseC2("identity", {}, {[](double r) { return Jet{r, 1.0, 0.0}; }});
}

}  // namespace catalog

}  // namespace splap
