#include <cmath>

#include "doctest.h"
#include "splap/config.hpp"
#include "splap/error.hpp"
#include "splap/estimators.hpp"
#include "splap/initialdata.hpp"

using namespace splap;

namespace {

ExperimentConfig small(double p = 2.0) {
  ExperimentConfig c;
  c.n_cells = 16;
  c.T = 0.04;
  c.dt = 2e-3;
  c.p = p;
  c.n_paths = 24;
  c.seed = 99;
  return c;
}

TestFunction psi(PsiKind k) { return TestFunction{k, 1.0}; }

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("compensated sum and summaries") {
    CompensatedSum s;
    for (double x : {1.0, 1e100, 1.0, -1e100}) s.add(x);
    CHECK(s.value() == 2.0);
    const std::vector<double> ones(10, 1.0);
    const MCResult r = summarize(ones, 1);
    CHECK(r.mean == 1.0);
    CHECK(r.std_error == 0.0);
    CHECK(r.n == 10);
    CHECK_THROWS_AS(summarize(std::vector<double>{1.0}, 1), Error);
    const std::vector<double> xs = {3.0, 4.0};
    CHECK(root_mean_square(xs) == doctest::Approx(std::sqrt(12.5)));
  }

  TEST_CASE("mc_expectation") {
    const MCResult one = mc_expectation([](std::uint64_t, std::uint64_t) { return 1.0; }, 50, 7);
    CHECK(one.mean == 1.0);
    CHECK(one.std_error == 0.0);
    const MCResult parity =
        mc_expectation([](std::uint64_t, std::uint64_t i) { return i % 2 ? -1.0 : 1.0; }, 4, 7);
    CHECK(parity.mean == 0.0);
    const auto exp = [](std::uint64_t seed, std::uint64_t i) {
      return sample_brownian(seed, i, 10, 0.1).terminal_value();
    };
    const MCResult a = mc_expectation(exp, 200, 11, 1);
    const MCResult b = mc_expectation(exp, 200, 11, 1);
    const MCResult c = mc_expectation(exp, 200, 11, 4);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
    CHECK(a.mean == c.mean);
    CHECK(a.std_error == c.std_error);
  }

  TEST_CASE("run_paths reports the first failing path") {
    try {
      run_paths(20, 3, [](std::uint64_t i) -> std::vector<double> {
        if (i == 7 || i == 13) throw Error(Errc::solver_failure, "boom");
        return {1.0};
      });
      FAIL("expected a path failure");
    } catch (const PathFailure& e) {
      CHECK(e.path_index() == 7);
      CHECK(e.cause() == Errc::solver_failure);
    }
  }

  TEST_CASE("refinement runs share Brownian paths") {
    ExperimentConfig c = small();
    const double dts[] = {4e-3, 2e-3, 1e-3};
    const auto runs = refinement_configs(c, dts);
    const auto coarse = brownian_for(runs[0], 3);
    const auto fine = brownian_for(runs[2], 3);
    REQUIRE(coarse.steps() * 4 == fine.steps());
    for (std::size_t j = 0; j < coarse.steps(); ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < 4; ++q) s += fine.increments[4 * j + q];
      CHECK(coarse.increments[j] == doctest::Approx(s).epsilon(1e-12));
    }
    const double bad[] = {3e-3, 2e-3};
    CHECK_THROWS_AS(refinement_configs(c, bad), Error);
  }

  TEST_CASE("energy constant") {
    CHECK(energy_constant(1, 1, 2, 1, 1) == doctest::Approx(4.0));
    CHECK(energy_constant(0.5, 2, 1, 1, 3) == doctest::Approx(0.5 * 4 * 1 * 1 / 2 + 3));
  }

  TEST_CASE("contraction: normalization, pathwise decay without noise, Ito bound") {
    ExperimentConfig c = small();
    const ContractionResult r = contraction_check(c);
    CHECK(r.ratio.front() == 1.0);
    CHECK(r.max_ratio >= 1.0);
    for (const auto& b : r.ito) {
      CHECK(b.violations == 0);
      CHECK(b.max_observed <= b.bound);
    }
    REQUIRE(r.ito.size() == 2);
    CHECK(r.ito[0].bound == doctest::Approx(0.1 * 1 * c.T * 1.0));

    c.noise.kind = NoiseKind::zero;
    for (double p : {2.0, 3.0}) {
      c.p = p;
      const ContractionResult z = contraction_check(c);
      CHECK(z.nonmonotone_paths == 0);
      for (std::size_t j = 1; j < z.ratio.size(); ++j) CHECK(z.ratio[j] <= z.ratio[j - 1] * (1 + 1e-12));
    }
  }

  TEST_CASE("energy: zero datum and inactive truncation") {
    ExperimentConfig c = small();
    c.u0 = sine_datum(0.0);
    const double ks[] = {1.0};
    const EnergyResult zero = energy_bound_check(c, ks);
    CHECK(zero.levels[0].lhs.mean == 0.0);
    CHECK(zero.levels[0].C == doctest::Approx(energy_constant(c.T, 1.0, 1.0, 1.0, 0.0)));

    c.u0 = sine_datum(2.0);
    const double huge[] = {1e6};
    const EnergyResult r = energy_bound_check(c, huge);
    CHECK(r.levels[0].lhs.mean == doctest::Approx(r.total_energy.mean).epsilon(1e-12));
  }

  TEST_CASE("dissipation: empty bands and partition") {
    ExperimentConfig c = small();
    std::vector<double> ks;
    for (int k = 0; k <= 12; ++k) ks.push_back(k);
    const DissipationResult r = dissipation_profile(c, ks);
    double sum = 0.0;
    for (std::size_t q = 0; q < ks.size(); ++q) {
      sum += r.D[q].mean;
      if (ks[q] >= r.observed_max) CHECK(r.D[q].mean == 0.0);
    }
    CHECK(sum == doctest::Approx(r.total_energy.mean).epsilon(1e-10));
  }

  TEST_CASE("renormalized residual: exact chain rule without noise") {
    const Grid1D g(32);
    const PiecewiseC2 S = catalog::hk_delta(50.0, 0.5);
    for (double p : {2.0, 3.0}) {
      const auto path = sample_brownian(1, 0, 50, 1e-3);
      const Trajectory tr = evolve(make_initial(sine_datum(1.0), g), NoiseModel::zero(), path, SchemeParams{p, 0.0, {}});
      CHECK(std::abs(renorm_path_residual(tr, NoiseModel::zero(), p, 0.0, S, psi(PsiKind::one))) <= 1e-8);
    }
    // psi_t enters through a time quadrature that is exact on this data as well.
    const auto path = sample_brownian(1, 0, 40, 1e-3);
    const Trajectory tr = evolve(make_initial(sine_datum(1.0), g), NoiseModel::zero(), path, SchemeParams{});
    for (PsiKind k : {PsiKind::sin_growing, PsiKind::sin}) {
      CHECK(std::abs(renorm_path_residual(tr, NoiseModel::zero(), 2.0, 0.0, S, psi(k))) <= 1e-8);
    }
  }

  TEST_CASE("renormalized residual: zero datum, admissibility, refinement") {
    ExperimentConfig c = small();
    c.u0 = sine_datum(0.0);
    const PsiKind kinds[] = {PsiKind::one, PsiKind::sin};
    for (const auto& r : renorm_residual(c, catalog::hk_delta(2, 0.5), kinds)) {
      CHECK(r.signed_residual.mean == 0.0);
      CHECK(r.rms == 0.0);
    }
    CHECK_THROWS_AS(check_renorm_admissible(catalog::identity(), psi(PsiKind::one)), Error);
    CHECK_NOTHROW(check_renorm_admissible(catalog::identity(), psi(PsiKind::sin)));
    CHECK_NOTHROW(check_renorm_admissible(catalog::hk_delta(2, 0.5), psi(PsiKind::one)));
  }

  TEST_CASE("product residual") {
    const PiecewiseC2 H = catalog::hk_delta(3, 0.5);
    const PiecewiseC2 Z = catalog::trunc_primitive(1);
    CHECK_NOTHROW(check_product_pair(H, Z));
    CHECK_THROWS_AS(check_product_pair(H, catalog::trunc(1)), Error);

    const Grid1D g(32);
    const auto path = sample_brownian(5, 0, 40, 1e-3);
    const NoiseModel phi = make_noise(NoiseParams{});
    const GridFunction a = make_initial(spike_datum(5.0), g);
    const GridFunction b = make_initial(sine_datum(1.0), g);
    const auto [u, u2] = evolve_coupled(a, a, phi, path, SchemeParams{});
    CHECK(product_path_residual(u, u2, phi, 2.0, 0.0, H, Z) == 0.0);
    for (double p : {2.0, 3.0}) {
      const auto [x, y] = evolve_coupled(a, b, NoiseModel::zero(), path, SchemeParams{p, 0.0, {}});
      CHECK(std::abs(product_path_residual(x, y, NoiseModel::zero(), p, 0.0, H, Z)) <= 1e-8);
    }
  }

  TEST_CASE("truncation levels") {
    ExperimentConfig c = small();
    CHECK(cauchy_initial_check(c, 3, 3).lhs.mean == 0.0);
    const CauchyResult inactive = cauchy_initial_check(c, 6, 8);
    CHECK(inactive.rhs == 0.0);
    CHECK(inactive.lhs.mean == 0.0);
    CHECK(monotonicity_gap(c, 4, 4, 1).mean == 0.0);
    CHECK(hz_coupling_diagnostic(c, 4, 4, catalog::hk_delta(2, 0.5), catalog::normalized_hk_delta(0.5, 2)).mean == 0.0);
    const MCResult gap = monotonicity_gap(c, 2, 8, 1e6);
    CHECK(gap.mean >= 0.0);
    const CauchyResult r = cauchy_initial_check(c, 2, 8);
    CHECK(r.rhs > 0.0);
    CHECK(r.lhs.mean <= r.rhs * 1.05 + 3 * r.lhs.std_error);
  }

  TEST_CASE("heat equation error shrinks under refinement") {
    const double coarse = heat_error(32, 1.0, 4e-4, 0.05, {});
    const double fine = heat_error(64, 1.0, 2e-4, 0.05, {});
    CHECK(fine < coarse);
    CHECK(coarse / fine >= 1.8);
  }

  TEST_CASE("log-log slope") {
    const std::vector<double> x = {1e-3, 2e-3, 4e-3};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::sqrt(v));
    CHECK(loglog_slope(x, y) == doctest::Approx(0.5));
  }

  TEST_CASE("estimators do not depend on the worker count") {
    ExperimentConfig c = small(3.0);
    c.workers = 1;
    const ContractionResult a = contraction_check(c);
    c.workers = 3;
    const ContractionResult b = contraction_check(c);
    for (std::size_t j = 0; j < a.distance.size(); ++j) {
      CHECK(a.distance[j].mean == b.distance[j].mean);
      CHECK(a.distance[j].std_error == b.distance[j].std_error);
    }
  }
}
