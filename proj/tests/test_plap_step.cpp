#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "splap/error.hpp"
#include "splap/plap_step.hpp"

using namespace splap;

namespace {

GridFunction random_field(const Grid1D& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(g.n_interior());
  for (auto& x : v) x = n(rng);
  return GridFunction(g, v);
}

double eps_for(double p) { return p < 2 ? 1e-4 : 0.0; }

}  // namespace

TEST_SUITE("plap_step") {
  TEST_CASE("single node, p = 2: closed form") {
    const Grid1D g(2);
    const GridFunction w = implicit_step(GridFunction(g, {1.0}), 0.125, 2, 0);
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("single node, p = 4: bisection oracle for w + w^3 = 1") {
    const Grid1D g(2);
    const double root = oracle::bisect([](double w) { return w + w * w * w - 1.0; }, 0.0, 1.0);
    const GridFunction w = implicit_step(GridFunction(g, {1.0}), 0.03125, 4, 0);
    CHECK(w[0] == doctest::Approx(root).epsilon(1e-9));
    CHECK(root == doctest::Approx(0.682328).epsilon(1e-6));
  }

  TEST_CASE("zero data stays zero") {
    const Grid1D g(16);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      for (double dt : {1e-4, 1e-1}) {
        const GridFunction w = implicit_step(GridFunction(g), dt, p, eps_for(p));
        CHECK(w.max_abs() == 0.0);
      }
    }
  }

  TEST_CASE("p = 2 agrees with a dense linear solve") {
    std::mt19937_64 rng(1);
    const Grid1D g(16, 1.5);
    const GridFunction data = random_field(g, rng);
    const double dt = 3e-3;
    const std::size_t n = g.n_interior();
    const double c = dt / (g.h() * g.h());
    std::vector<double> A(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      A[i * n + i] = 1 + 2 * c;
      if (i > 0) A[i * n + i - 1] = -c;
      if (i + 1 < n) A[i * n + i + 1] = -c;
    }
    const auto x = oracle::gauss_solve(A, data.vec());
    const GridFunction w = implicit_step(data, dt, 2, 0);
    for (std::size_t i = 0; i < n; ++i) CHECK(w[i] == doctest::Approx(x[i]).epsilon(1e-10));
    CHECK(step_residual(GridFunction(g, x), data, dt, 2, 0) <= 1e-12);
  }

  TEST_CASE("residual contract") {
    std::mt19937_64 rng(2);
    const Grid1D g(32);
    const SolverOptions opts;
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const GridFunction data = random_field(g, rng);
      StepStats st;
      const GridFunction w = implicit_step(data, 1e-3, p, eps_for(p), opts, &st);
      CHECK(step_residual(w, data, 1e-3, p, eps_for(p)) <= opts.grad_tol * (1 + l2_norm(data)));
      CHECK(st.residual <= opts.grad_tol * (1 + l2_norm(data)));
      CHECK(step_residual(data, data, 1e-3, p, eps_for(p)) > 0);
    }
  }

  TEST_CASE("L1 non-expansive, order preserving, energy decreasing") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> shift(0.0, 1.0);
    const Grid1D g(24);
    const SolverOptions opts;
    for (double p : {1.5, 2.0, 3.0}) {
      for (int trial = 0; trial < 10; ++trial) {
        const GridFunction g1 = random_field(g, rng, 2.0);
        GridFunction g2 = random_field(g, rng, 2.0);
        const double dt = 1e-3;
        const GridFunction w1 = implicit_step(g1, dt, p, eps_for(p));
        const GridFunction w2 = implicit_step(g2, dt, p, eps_for(p));
        CHECK(l1_norm(w1 - w2) <= l1_norm(g1 - g2) + 10 * opts.grad_tol);
        CHECK(step_objective(w1, g1, dt, p, eps_for(p)) <= step_objective(g1, g1, dt, p, eps_for(p)));

        GridFunction above = g1;
        for (std::size_t i = 0; i < above.size(); ++i) above[i] += shift(rng);
        const GridFunction wa = implicit_step(above, dt, p, eps_for(p));
        for (std::size_t i = 0; i < above.size(); ++i) CHECK(wa[i] >= w1[i] - 1e-9);
      }
    }
  }

  TEST_CASE("objective gradient matches finite differences") {
    std::mt19937_64 rng(4);
    const Grid1D g(10);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      Resolvent R(g, 1e-2, p, eps_for(p) + (p < 2 ? 0.0 : 0.0));
      const GridFunction data = random_field(g, rng);
      GridFunction w = random_field(g, rng);
      std::vector<double> res(g.n_interior());
      R.residual(w.values(), data.values(), res);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double step = 1e-6;
        GridFunction up = w, dn = w;
        up[i] += step;
        dn[i] -= step;
        const double fd = (R.objective(up.values(), data.values()) - R.objective(dn.values(), data.values())) /
                          (2 * step);
        CHECK(fd == doctest::Approx(g.h() * res[i]).epsilon(1e-6).scale(1e-3));
      }
    }
  }

  TEST_CASE("solver failure carries the last iterate") {
    std::mt19937_64 rng(8);
    const Grid1D g(32);
    SolverOptions opts;
    opts.max_iter = 1;
    opts.grad_tol = 1e-14;
    const GridFunction data = random_field(g, rng, 5.0);
    try {
      implicit_step(data, 1e-2, 3, 0, opts);
      FAIL("expected a solver failure");
    } catch (const SolverFailure& e) {
      CHECK(e.code() == Errc::solver_failure);
      CHECK(e.last_iterate().size() == g.n_interior());
      CHECK(e.residual() > 0);
    }
  }

  TEST_CASE("invalid solver settings") {
    SolverOptions o;
    o.armijo_c = 1.5;
    CHECK_THROWS_AS(o.validate(), Error);
    const Grid1D g(4);
    CHECK_THROWS_AS(Resolvent(g, -1.0, 2, 0), Error);
    CHECK_THROWS_AS(Resolvent(g, 1e-3, 1.5, 0.0), Error);
    CHECK_THROWS_AS(Resolvent(g, 1e-3, 1.0, 0.1), Error);
  }
}
