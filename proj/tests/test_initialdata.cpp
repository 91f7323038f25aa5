#include <cmath>

#include "doctest.h"
#include "splap/config.hpp"
#include "splap/error.hpp"
#include "splap/initialdata.hpp"

using namespace splap;

TEST_SUITE("initialdata") {
  TEST_CASE("sine peak") {
    const Grid1D g(64);
    const GridFunction u = make_initial(sine_datum(1.0), g);
    CHECK(u.at_node(32) == doctest::Approx(1.0));
    CHECK(u.at_node(0) == 0.0);
    CHECK(make_initial(sine_datum(2.0, 2), g).at_node(16) == doctest::Approx(2.0));
  }

  TEST_CASE("spike mass is close to height times width") {
    const Grid1D g(256);
    const GridFunction u = make_initial(spike_datum(10.0), g);
    CHECK(l1_norm(u) == doctest::Approx(10.0 * 0.1).epsilon(0.1));
    CHECK(u.max_abs() == 10.0);
    CHECK(u.all_finite());
  }

  TEST_CASE("capped power singularity approaches its integral") {
    InitialSpec s;
    s.kind = InitialKind::power_singularity;
    s.alpha = 0.5;
    const GridFunction u = make_initial(s, Grid1D(256));
    CHECK(l1_norm(u) == doctest::Approx(2.0).epsilon(0.15));
    s.alpha = 1.0;
    CHECK_THROWS_AS(make_initial(s, Grid1D(16)), Error);
  }

  TEST_CASE("random amplitude depends on the path index only through its stream") {
    InitialSpec s;
    s.kind = InitialKind::random_amplitude;
    s.seed = 3;
    const Grid1D g(16);
    CHECK(make_initial(s, g, 1) == make_initial(s, g, 1));
    CHECK_FALSE(make_initial(s, g, 1) == make_initial(s, g, 2));
    const double peak = make_initial(s, g, 5).at_node(8);
    CHECK(peak >= 0.5);
    CHECK(peak <= 1.5);
  }

  TEST_CASE("truncation of initial data") {
    const Grid1D g(256);
    const GridFunction u = make_initial(spike_datum(10.0), g);
    CHECK(truncate_initial(u, 10.0) == u);
    CHECK(truncate_initial(u, 50.0) == u);
    const GridFunction t2 = truncate_initial(u, 2.0);
    CHECK(t2.max_abs() == 2.0);
    CHECK(t2.at_node(128) == 2.0);
    // Mass above level 2: (10 - 2) * 0.1 on the plateau plus thin ramps.
    CHECK(l1_norm(u - t2) == doctest::Approx(0.8).epsilon(0.1));
    double prev = l1_norm(u);
    for (double n = 0.5; n <= 11.0; n += 0.5) {
      const GridFunction t = truncate_initial(u, n);
      for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(t[i]) <= std::abs(u[i]));
      const double d = l1_norm(u - t);
      CHECK(d <= prev);
      prev = d;
    }
    CHECK(prev == 0.0);
  }

  TEST_CASE("spec validation") {
    InitialSpec s = spike_datum(1.0);
    s.width = 0.0;
    CHECK_THROWS_AS(s.validate(), Error);
    InitialSpec m = sine_datum(1.0, 0);
    CHECK_THROWS_AS(m.validate(), Error);
    for (auto k : {InitialKind::sine, InitialKind::spike, InitialKind::power_singularity, InitialKind::random_amplitude}) {
      CHECK(parse_initial_kind(to_string(k)) == k);
    }
  }
}
