#include <algorithm>

#include "doctest.h"
#include "splap/config.hpp"
#include "splap/error.hpp"

using namespace splap;

namespace {

bool mentions(const std::vector<std::string>& list, const std::string& key) {
  return std::any_of(list.begin(), list.end(),
                     [&](const std::string& s) { return s.find(key) != std::string::npos; });
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults are runnable") {
    const ExperimentConfig c;
    CHECK(c.violations().empty());
    CHECK(c.steps() == 500);
    CHECK(c.n_cells == 64);
    CHECK(c.seed == 20240607u);
  }

  TEST_CASE("echo parses back to the same configuration") {
    ExperimentConfig c;
    c.set("time.dt", "0.0025");
    c.set("scheme.p", "3");
    c.set("noise.kind", "sinusoidal");
    c.set("u0.kind", "power_singularity");
    c.set("levels.pairs", "1:3, 2:5");
    c.set("renorm.psi", "sin");
    const std::string text = c.echo();
    const ExperimentConfig back = ExperimentConfig::parse(text);
    CHECK(back.echo() == text);
    CHECK(back.dt == 0.0025);
    CHECK(back.level_pairs.size() == 2);
    CHECK(back.level_pairs[1].m == 5.0);
    CHECK(ExperimentConfig::parse(ExperimentConfig{}.echo()).echo() == ExperimentConfig{}.echo());
  }

  TEST_CASE("violations name their keys") {
    ExperimentConfig c;
    c.p = 1.0;
    CHECK(mentions(c.violations(), "scheme.p must exceed 1"));
    c = ExperimentConfig{};
    c.dt = 1.0;
    CHECK(mentions(c.violations(), "time.dt"));
    c = ExperimentConfig{};
    c.T = 0.5;
    c.dt = 0.3;
    CHECK(mentions(c.violations(), "time.dt must divide time.T"));
    c = ExperimentConfig{};
    c.n_paths = 1;
    CHECK(mentions(c.violations(), "mc.n_paths"));
    c = ExperimentConfig{};
    c.p = 1.5;
    c.eps = 0.0;
    CHECK(mentions(c.violations(), "scheme.eps"));
  }

  TEST_CASE("parser: sections, comments, errors") {
    const ExperimentConfig c = ExperimentConfig::parse(
        "# comment line\n[grid]\nn_cells = 32   # trailing\n\n[mc]\nseed = 7\nn_paths = 10\n");
    CHECK(c.n_cells == 32);
    CHECK(c.seed == 7u);
    CHECK(c.n_paths == 10);
    const auto code = [](const std::string& text) {
      try {
        (void)ExperimentConfig::parse(text);
      } catch (const Error& e) {
        return e.code();
      }
      return Errc::invalid_argument;
    };
    CHECK(code("[grid]\nbogus = 1\n") == Errc::config_error);
    CHECK(code("[grid\n") == Errc::config_error);
    CHECK(code("no equals sign\n") == Errc::config_error);
    CHECK(code("[mc]\nn_paths = -3\n") == Errc::config_error);
    CHECK(code("[time]\ndt = fast\n") == Errc::config_error);
    try {
      (void)ExperimentConfig::load("/nonexistent/path.cfg");
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::io_error);
    }
  }

  TEST_CASE("validate_config_text collects every problem") {
    const auto v = validate_config_text("[grid]\nbogus = 1\n[time]\ndt = 2\n[scheme]\np = 0.5\n");
    CHECK(v.size() >= 3);
    CHECK(mentions(v, "bogus"));
    CHECK(mentions(v, "time.dt"));
    CHECK(mentions(v, "scheme.p"));
    CHECK(validate_config_text("").empty());
  }

  TEST_CASE("renormalizer specs") {
    const RenormSpec s = RenormSpec::parse("hk_delta(3, 0.25)");
    CHECK(s.name == "hk_delta");
    REQUIRE(s.args.size() == 2);
    CHECK(s.args[1] == 0.25);
    CHECK(RenormSpec::parse(s.to_string()).to_string() == s.to_string());
    CHECK_THROWS_AS(RenormSpec::parse("nothing(1)").build(), Error);
    CHECK_THROWS_AS(RenormSpec::parse("hk_delta(1"), Error);
  }
}
