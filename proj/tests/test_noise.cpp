#include <cmath>
#include <random>

#include "doctest.h"
#include "splap/error.hpp"
#include "splap/noise.hpp"

using namespace splap;

namespace {

NoiseModel model(NoiseKind kind, double L = 1.0, double M = 2.0) {
  NoiseParams p;
  p.kind = kind;
  p.L = L;
  p.M = M;
  return make_noise(p);
}

const NoiseKind kShipped[] = {NoiseKind::zero, NoiseKind::bounded_trunc, NoiseKind::linear,
                              NoiseKind::sinusoidal, NoiseKind::time_modulated};

}  // namespace

TEST_SUITE("noise") {
  TEST_CASE("evaluations") {
    CHECK(model(NoiseKind::bounded_trunc)(0.3, 3.0) == doctest::Approx(2.0));
    CHECK(model(NoiseKind::bounded_trunc)(0.3, -0.5) == doctest::Approx(-0.5));
    CHECK(model(NoiseKind::linear, 0.5)(1.0, 4.0) == doctest::Approx(2.0));
    for (NoiseKind k : kShipped) {
      for (double t : {0.0, 0.7, 5.0}) CHECK(model(k)(t, 0.0) == 0.0);
    }
  }

  TEST_CASE("names round trip") {
    for (NoiseKind k : kShipped) CHECK(parse_noise_kind(to_string(k)) == k);
    CHECK_FALSE(parse_noise_kind("gaussian").has_value());
  }

  TEST_CASE("validation of shipped models") {
    CHECK(validate_noise(model(NoiseKind::bounded_trunc), 10000, 10.0, 1).ok());
    CHECK(validate_noise(model(NoiseKind::time_modulated), 10000, 10.0, 2).ok());
    for (NoiseKind k : kShipped) {
      CAPTURE(to_string(k));
      const NoiseReport r = validate_noise(model(k, 1.3, 2.5), 100000, 1000.0, 3);
      CHECK(r.ok());
      CHECK(r.samples == 100000);
      CHECK(r.max_quotient <= 1.3 * (1 + 1e-6));
    }
  }

  TEST_CASE("broken model is caught") {
    const NoiseModel bad = NoiseModel::custom([](double, double x) { return x * x; }, 1.0, std::nullopt, "square");
    const NoiseReport r = validate_noise(bad, 10000, 10.0, 4);
    CHECK_FALSE(r.ok());
    bool lipschitz = false;
    for (const auto& v : r.violations) lipschitz = lipschitz || v.kind == NoiseViolation::Kind::lipschitz;
    CHECK(lipschitz);
    CHECK(r.violations.size() <= 16);

    const NoiseModel shifted = NoiseModel::custom([](double, double x) { return x + 1.0; }, 1.0, std::nullopt, "shift");
    CHECK(validate_noise(shifted, 100, 1.0, 5).violations.front().kind ==
          NoiseViolation::Kind::nonzero_at_origin);
  }

  TEST_CASE("increments within delta obey the L^2 delta^2 bound") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> pos(-20.0, 20.0);
    std::uniform_real_distribution<double> off(-1.0, 1.0);
    for (NoiseKind k : kShipped) {
      const NoiseModel m = model(k, 1.7, 3.0);
      for (double delta : {0.1, 0.01}) {
        for (int i = 0; i < 20000; ++i) {
          const double a = pos(rng);
          const double b = a + delta * off(rng);
          const double d = m(0.4, a) - m(0.4, b);
          CHECK(d * d <= 1.7 * 1.7 * delta * delta * (1 + 1e-9));
        }
      }
    }
  }

  TEST_CASE("invalid constants are rejected") {
    CHECK_THROWS_AS(model(NoiseKind::bounded_trunc, 0.0), Error);
    CHECK_THROWS_AS(model(NoiseKind::bounded_trunc, 1.0, -1.0), Error);
    CHECK_THROWS_AS(model(NoiseKind::linear, -2.0), Error);
  }
}
