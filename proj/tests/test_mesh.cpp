#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "splap/error.hpp"
#include "splap/mesh.hpp"

using namespace splap;

namespace {

GridFunction random_field(const Grid1D& g, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(g.n_interior());
  for (auto& x : v) x = n(rng);
  return GridFunction(g, v);
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("grid geometry") {
    const Grid1D g(4, 2.0);
    CHECK(g.h() == doctest::Approx(0.5));
    CHECK(g.n_interior() == 3);
    CHECK(g.x(4) == doctest::Approx(2.0));
    CHECK_THROWS_AS(Grid1D(1), Error);
    CHECK_THROWS_AS(Grid1D(8, -1.0), Error);
  }

  TEST_CASE("gradient by hand") {
    const Grid1D g2(2);
    const auto e = gradient(GridFunction(g2, {1.0}));
    REQUIRE(e.size() == 2);
    CHECK(e[0] == doctest::Approx(2.0));
    CHECK(e[1] == doctest::Approx(-2.0));

    const Grid1D g4(4);
    const auto f = gradient(GridFunction(g4, {0.25, 0.5, 0.25}));
    const double want[] = {1, 1, -1, -1};
    for (int i = 0; i < 4; ++i) CHECK(f[i] == doctest::Approx(want[i]));
    for (double x : gradient(GridFunction(g4))) CHECK(x == 0);
  }

  TEST_CASE("p_flux") {
    CHECK(p_flux(2, 3, 0) == doctest::Approx(4.0));
    CHECK(p_flux(-2, 3, 0) == doctest::Approx(-4.0));
    CHECK(p_flux(1, 1.5, 1) == doctest::Approx(0.840896).epsilon(1e-6));
    CHECK(p_flux(0.7, 2, 0) == doctest::Approx(0.7));
    CHECK_THROWS_AS(p_flux(1, 1.0, 0), Error);
    CHECK_THROWS_AS(p_flux(0.0, 1.5, 0.0), Error);
    CHECK_THROWS_AS(check_flux_parameters(0.5, 0.0), Error);
    // Derivative against a central difference.
    for (double p : {1.5, 2.0, 3.0, 4.5}) {
      for (double s : {-1.3, 0.2, 2.0}) {
        const double hstep = 1e-6;
        const double fd = (p_flux(s + hstep, p, 0.1) - p_flux(s - hstep, p, 0.1)) / (2 * hstep);
        CHECK(p_flux_derivative(s, p, 0.1) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("p_laplacian by hand") {
    // u = [1] on two cells: (0 - 2 + 0) / h^2 with h = 1/2.
    const Grid1D g2(2);
    CHECK(p_laplacian(GridFunction(g2, {1.0}), 2, 0)[0] == doctest::Approx(-8.0));
    // p = 2 is the three-point second difference.
    std::mt19937_64 rng(3);
    const Grid1D g(9, 1.3);
    const GridFunction u = random_field(g, rng);
    const GridFunction lap = p_laplacian(u, 2, 0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double want = (u.at_node(i) - 2 * u.at_node(i + 1) + u.at_node(i + 2)) / (g.h() * g.h());
      CHECK(lap[i] == doctest::Approx(want).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(p_laplacian(GridFunction(g), 3, 0)[i] == 0);
  }

  TEST_CASE("integrate and norms") {
    const Grid1D g(5);
    const GridFunction c(g, std::vector<double>(4, 3.0));
    CHECK(integrate(c, [](double x) { return x; }) == doctest::Approx(3.0 * 0.2 * 4));
    const Grid1D g3(3);
    const GridFunction u(g3, {1.0, -2.0});
    CHECK(integrate(u, [](double x) { return std::abs(x); }) == doctest::Approx(1.0));
    CHECK(l1_norm(u) == doctest::Approx(1.0));
    CHECK(l2_norm(u) == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(integrate(u, [](double) { return 0.0; }) == 0);
  }

  TEST_CASE("level-set and truncated energies by hand") {
    const Grid1D g2(2);
    const GridFunction hat(g2, {1.0});
    CHECK(levelset_gradient_integral(hat, 2, 0.3, 0.7) == doctest::Approx(4.0));
    CHECK(levelset_gradient_integral(hat, 2, 0.6, 0.7) == 0);
    CHECK(levelset_gradient_integral(hat, 2, 0.0, 1e300) == doctest::Approx(gradient_energy(hat, 2)));
    CHECK(levelset_gradient_integral(GridFunction(g2), 2, 0.0, 1.0) == 0);
    CHECK(truncated_gradient_energy(GridFunction(g2, {10.0}), 1, 2) == doctest::Approx(4.0));
    CHECK(truncated_gradient_energy(GridFunction(g2), 1, 2) == 0);
  }

  TEST_CASE("summation by parts") {
    std::mt19937_64 rng(11);
    const Grid1D g(17, 2.0);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const double eps = p < 2 ? 1e-3 : 0.0;
      for (int trial = 0; trial < 5; ++trial) {
        const GridFunction u = random_field(g, rng);
        const GridFunction v = random_field(g, rng);
        const GridFunction lap = p_laplacian(u, p, eps);
        double lhs = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) lhs += g.h() * v[i] * lap[i];
        const auto du = gradient(u);
        const auto dv = gradient(v);
        double rhs = 0.0;
        double scale = 0.0;
        for (std::size_t e = 0; e < du.size(); ++e) {
          rhs -= g.h() * p_flux(du[e], p, eps) * dv[e];
          scale += g.h() * std::abs(p_flux(du[e], p, eps) * dv[e]);
        }
        CHECK(std::abs(lhs - rhs) <= 1e-10 * scale);
      }
    }
  }

  TEST_CASE("monotonicity pairing is nonnegative") {
    std::mt19937_64 rng(5);
    const Grid1D g(12);
    for (double p : {1.5, 2.0, 3.0}) {
      for (int trial = 0; trial < 50; ++trial) {
        const GridFunction u = random_field(g, rng, 2.0);
        const GridFunction v = random_field(g, rng, 2.0);
        CHECK(monotonicity_pairing(u, v, p, p < 2 ? 1e-6 : 0.0) >= 0.0);
      }
    }
  }

  TEST_CASE("truncated energy grows with k and saturates") {
    std::mt19937_64 rng(9);
    const Grid1D g(20);
    const GridFunction u = random_field(g, rng, 3.0);
    double prev = 0.0;
    for (double k = 0.25; k <= 12.0; k += 0.25) {
      const double e = truncated_gradient_energy(u, k, 3);
      CHECK(e >= prev - 1e-12);
      prev = e;
      if (k >= u.max_abs()) CHECK(e == doctest::Approx(gradient_energy(u, 3)));
    }
  }

  TEST_CASE("band partition sums to the full energy") {
    std::mt19937_64 rng(21);
    const Grid1D g(30);
    const GridFunction u = random_field(g, rng, 2.0);
    double sum = 0.0;
    for (int k = 0; k < 20; ++k) sum += levelset_gradient_integral(u, 2.5, k, k + 1);
    CHECK(sum == doctest::Approx(gradient_energy(u, 2.5)).epsilon(1e-10));
  }

  TEST_CASE("grid function arithmetic") {
    const Grid1D g(4);
    GridFunction a(g, {1, 2, 3});
    const GridFunction b(g, {1, 1, 1});
    CHECK((a - b)[2] == 2);
    CHECK((a + b)[0] == 2);
    CHECK(a.max_abs() == 3);
    a[1] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(a.all_finite());
    CHECK_THROWS_AS(GridFunction(g, {1.0}), Error);
    CHECK_THROWS_AS(a += GridFunction(Grid1D(5)), Error);
  }
}
