#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "splap/error.hpp"
#include "splap/estimators.hpp"
#include "splap/sde.hpp"

using namespace splap;

namespace {

SchemeParams scheme(double p = 2.0) {
  SchemeParams s;
  s.p = p;
  s.eps = p < 2 ? 1e-4 : 0.0;
  return s;
}

NoiseModel noise(NoiseKind kind, double L = 1.0) {
  NoiseParams p;
  p.kind = kind;
  p.L = L;
  return make_noise(p);
}

GridFunction sine(const Grid1D& g, double amp = 1.0) {
  return GridFunction::from_function(g, [&](double x) { return amp * std::sin(std::numbers::pi * x / g.length()); });
}

}  // namespace

TEST_SUITE("sde") {
  TEST_CASE("Brownian increments are reproducible and stream separated") {
    const auto a = sample_brownian(42, 3, 50, 1e-2);
    const auto b = sample_brownian(42, 3, 50, 1e-2);
    CHECK(a.increments == b.increments);
    CHECK(sample_brownian(42, 4, 50, 1e-2).increments != a.increments);
    CHECK(sample_brownian(43, 3, 50, 1e-2).increments != a.increments);
    CHECK(make_stream(1, 2, StreamTag::brownian)() != make_stream(1, 2, StreamTag::initial_datum)());
  }

  TEST_CASE("Brownian moments") {
    const std::size_t n = 10000;
    const std::size_t J = 5;
    const double dt = 0.02;
    std::vector<double> terminal(n);
    std::vector<double> sq(J, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto path = sample_brownian(2024, i, J, dt);
      terminal[i] = path.terminal_value();
      for (std::size_t j = 0; j < J; ++j) sq[j] += path.increments[j] * path.increments[j];
    }
    const MCResult m = summarize(terminal, 2024);
    CHECK(std::abs(m.mean) <= 4 * m.std_error);
    for (std::size_t j = 0; j < J; ++j) CHECK(sq[j] / n == doctest::Approx(dt).epsilon(0.1));
  }

  TEST_CASE("coarsening sums blocks") {
    const auto fine = sample_brownian(5, 0, 12, 0.25);
    const auto coarse = fine.coarsen(3);
    REQUIRE(coarse.steps() == 4);
    CHECK(coarse.dt == doctest::Approx(0.75));
    CHECK(coarse.increments[1] ==
          doctest::Approx(fine.increments[3] + fine.increments[4] + fine.increments[5]));
    CHECK(coarse.terminal_value() == doctest::Approx(fine.terminal_value()));
    CHECK_THROWS_AS(fine.coarsen(5), Error);
  }

  TEST_CASE("zero noise, p = 2: discrete sine mode decays exactly") {
    const Grid1D g(32);
    const double dt = 1e-3;
    const int J = 100;
    const auto path = sample_brownian(1, 0, J, dt);
    const Trajectory tr = evolve(sine(g), NoiseModel::zero(), path, scheme());
    const double factor = oracle::discrete_heat_factor(1, 32, 1.0, dt, J);
    const GridFunction want = sine(g, factor);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(tr.final_state()[i] == doctest::Approx(want[i]).epsilon(1e-9));
    // Continuum decay exp(-pi^2 t) up to scheme error.
    CHECK(factor == doctest::Approx(std::exp(-std::numbers::pi * std::numbers::pi * dt * J)).epsilon(0.01));
    CHECK(tr.times.back() == doctest::Approx(dt * J));
    CHECK(tr.states.size() == static_cast<std::size_t>(J + 1));
  }

  TEST_CASE("zero datum stays zero for every admissible noise") {
    const Grid1D g(16);
    const auto path = sample_brownian(3, 1, 40, 1e-3);
    for (NoiseKind k : {NoiseKind::bounded_trunc, NoiseKind::linear, NoiseKind::sinusoidal, NoiseKind::time_modulated}) {
      for (double p : {1.5, 2.0, 3.0}) {
        const Trajectory tr = evolve(GridFunction(g), noise(k), path, scheme(p));
        for (const auto& s : tr.states) CHECK(s.max_abs() == 0.0);
      }
    }
  }

  TEST_CASE("one step is noise update then implicit step") {
    const Grid1D g(16);
    const auto path = sample_brownian(9, 0, 1, 1e-3);
    const GridFunction u0 = sine(g, 2.0);
    const NoiseModel phi = noise(NoiseKind::bounded_trunc);
    const Trajectory tr = evolve(u0, phi, path, scheme(3.0));
    GridFunction gdata = u0;
    for (std::size_t i = 0; i < gdata.size(); ++i) gdata[i] += phi(0.0, u0[i]) * path.increments[0];
    const GridFunction w = implicit_step(gdata, 1e-3, 3.0, 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(tr.final_state()[i] == doctest::Approx(w[i]).epsilon(1e-12));
    CHECK(tr.states[0] == u0);
  }

  TEST_CASE("coupled runs") {
    const Grid1D g(12);
    const auto path = sample_brownian(4, 2, 30, 1e-3);
    const NoiseModel phi = noise(NoiseKind::bounded_trunc);
    const GridFunction a = sine(g, 1.5);
    const GridFunction b = sine(g, -0.5);
    const auto [u, v] = evolve_coupled(a, a, phi, path, scheme());
    for (std::size_t j = 0; j < u.states.size(); ++j) CHECK(u.states[j] == v.states[j]);
    const auto [x, y] = evolve_coupled(a, b, phi, path, scheme());
    const auto [y2, x2] = evolve_coupled(b, a, phi, path, scheme());
    CHECK(x.final_state() == x2.final_state());
    CHECK(y.final_state() == y2.final_state());
  }

  TEST_CASE("coupled linear noise, one node: scalar recursion") {
    const Grid1D g(2);
    const double dt = 0.01;
    const double L = 0.7;
    const auto path = sample_brownian(12, 0, 1, dt);
    const auto [u, v] = evolve_coupled(GridFunction(g, {2.0}), GridFunction(g, {0.5}),
                                       noise(NoiseKind::linear, L), path, scheme());
    const double want = (2.0 - 0.5) * (1 + L * path.increments[0]) / (1 + 2 * dt / (g.h() * g.h()));
    CHECK(u.final_state()[0] - v.final_state()[0] == doctest::Approx(want).epsilon(1e-12));
  }

  TEST_CASE("Ito sums") {
    const Grid1D g(8);
    const auto path = sample_brownian(6, 0, 25, 1e-2);
    const Trajectory tr = evolve(sine(g), noise(NoiseKind::bounded_trunc), path, scheme());
    CHECK(ito_integral(tr, [](const GridFunction&, double) { return 2.5; }) ==
          doctest::Approx(2.5 * path.terminal_value()));
    CHECK(ito_integral(tr, [](const GridFunction&, double) { return 0.0; }) == 0.0);

    std::vector<double> samples;
    for (std::size_t i = 0; i < 10000; ++i) {
      const auto p = sample_brownian(77, i, 10, 1e-2);
      const Trajectory t = evolve(sine(Grid1D(4)), noise(NoiseKind::bounded_trunc), p, scheme());
      samples.push_back(ito_integral(t, [](const GridFunction& u, double) { return l1_norm(u); }));
    }
    const MCResult m = summarize(samples, 77);
    CHECK(std::abs(m.mean) <= 4 * m.std_error);
  }

  TEST_CASE("adaptedness: a truncated path reproduces the prefix") {
    const Grid1D g(16);
    auto path = sample_brownian(8, 1, 40, 1e-3);
    const NoiseModel phi = noise(NoiseKind::bounded_trunc);
    const Trajectory full = evolve(sine(g, 3.0), phi, path, scheme(3.0));
    path.increments.resize(17);
    const Trajectory part = evolve(sine(g, 3.0), phi, path, scheme(3.0));
    for (std::size_t j = 0; j < part.states.size(); ++j) CHECK(part.states[j] == full.states[j]);
  }

  TEST_CASE("solver failures name the step") {
    const Grid1D g(16);
    SchemeParams s = scheme(3.0);
    s.solver.max_iter = 1;
    s.solver.grad_tol = 1e-14;
    const auto path = sample_brownian(1, 0, 5, 1e-2);
    try {
      evolve(sine(g, 5.0), NoiseModel::zero(), path, s);
      FAIL("expected a solver failure");
    } catch (const SolverFailure& e) {
      CHECK(e.step_index() == 0);
    }
  }
}
