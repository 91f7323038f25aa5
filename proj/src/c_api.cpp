#include "splap/splap.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "splap/config.hpp"
#include "splap/error.hpp"
#include "splap/plap_step.hpp"
#include "splap/runner.hpp"
#include "splap/sde.hpp"

struct splap_config {
  splap::ExperimentConfig cfg;
};

struct splap_result {
  splap::RunResult run;
};

namespace {

thread_local std::string g_last_error;

splap_status fail(splap_status status, const std::string& what) {
  g_last_error = what;
  return status;
}

splap_status status_of(splap::Errc code) {
  switch (code) {
    case splap::Errc::invalid_argument: return SPLAP_ERR_INVALID_ARGUMENT;
    case splap::Errc::solver_failure: return SPLAP_ERR_SOLVER;
    case splap::Errc::config_error: return SPLAP_ERR_CONFIG;
    case splap::Errc::io_error: return SPLAP_ERR_IO;
    case splap::Errc::path_failure: return SPLAP_ERR_PATH;
  }
  return SPLAP_ERR_INTERNAL;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
splap_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return SPLAP_OK;
  } catch (const splap::PathFailure& e) {
    // A path that died in the solver is reported as a solver failure.
    return fail(e.cause() == splap::Errc::solver_failure ? SPLAP_ERR_SOLVER : SPLAP_ERR_PATH,
                e.what());
  } catch (const splap::Error& e) {
    return fail(status_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPLAP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPLAP_ERR_INTERNAL, e.what());
  }
}

char* duplicate(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

splap_status null_argument(const char* name) {
  return fail(SPLAP_ERR_INVALID_ARGUMENT, std::string(name) + " must not be NULL");
}

}  // namespace

extern "C" {

const char* splap_version(void) { return SPLAP_VERSION_STRING; }

const char* splap_status_name(splap_status status) {
  switch (status) {
    case SPLAP_OK: return "ok";
    case SPLAP_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SPLAP_ERR_SOLVER: return "solver_failure";
    case SPLAP_ERR_CONFIG: return "config_error";
    case SPLAP_ERR_IO: return "io_error";
    case SPLAP_ERR_PATH: return "path_failure";
    case SPLAP_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* splap_last_error(void) { return g_last_error.c_str(); }

void splap_string_free(char* text) { delete[] text; }

splap_status splap_config_default(splap_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] { *out = new splap_config{}; });
}

splap_status splap_config_parse(const char* text, splap_config** out) {
  if (!text) return null_argument("text");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new splap_config{splap::ExperimentConfig::parse(text)}; });
}

splap_status splap_config_load(const char* path, splap_config** out) {
  if (!path) return null_argument("path");
  if (!out) return null_argument("out");
  return guarded([&] { *out = new splap_config{splap::ExperimentConfig::load(path)}; });
}

void splap_config_free(splap_config* cfg) { delete cfg; }

splap_status splap_config_set(splap_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_argument("cfg");
  if (!key || !value) return null_argument("key/value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

splap_status splap_config_echo(const splap_config* cfg, char** text) {
  if (!cfg) return null_argument("cfg");
  if (!text) return null_argument("text");
  return guarded([&] { *text = duplicate(cfg->cfg.echo()); });
}

size_t splap_config_violation_count(const splap_config* cfg) {
  return cfg ? cfg->cfg.violations().size() : 0;
}

splap_status splap_config_violations(const splap_config* cfg, char** text) {
  if (!cfg) return null_argument("cfg");
  if (!text) return null_argument("text");
  return guarded([&] {
    std::string all;
    for (const auto& v : cfg->cfg.violations()) all += v + "\n";
    *text = duplicate(all);
  });
}

splap_status splap_validate_file(const char* path, size_t* n_violations, char** report) {
  if (!path) return null_argument("path");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw splap::Error(splap::Errc::io_error, std::string("cannot read config file '") + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto v = splap::validate_config_text(buf.str());
    if (n_violations) *n_violations = v.size();
    if (report) {
      std::string all;
      for (const auto& s : v) all += s + "\n";
      *report = duplicate(all);
    }
  });
}

const char* splap_subcommands(void) {
  static const std::string names = [] {
    std::string s;
    for (const auto& n : splap::subcommands()) s += (s.empty() ? "" : " ") + n;
    return s;
  }();
  return names.c_str();
}

splap_status splap_run(const char* subcommand, const splap_config* cfg, const char* out_dir,
                       splap_result** out) {
  if (!subcommand) return null_argument("subcommand");
  if (!cfg) return null_argument("cfg");
  if (!out_dir) return null_argument("out_dir");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new splap_result{splap::run_subcommand(subcommand, cfg->cfg, out_dir)};
  });
}

void splap_result_free(splap_result* result) { delete result; }

int splap_result_passed(const splap_result* result) { return result && result->run.passed ? 1 : 0; }

const char* splap_result_failures(const splap_result* result) {
  return result ? result->run.failures.c_str() : "";
}

double splap_result_seconds(const splap_result* result) { return result ? result->run.seconds : 0.0; }

size_t splap_result_summary_count(const splap_result* result) {
  return result ? result->run.summary.size() : 0;
}

splap_status splap_result_summary(const splap_result* result, size_t index, const char** quantity,
                                  double* value, double* std_error, double* threshold, int* pass) {
  if (!result) return null_argument("result");
  if (index >= result->run.summary.size()) {
    return fail(SPLAP_ERR_INVALID_ARGUMENT, "summary index out of range");
  }
  const auto& row = result->run.summary[index];
  if (quantity) *quantity = row.quantity.c_str();
  if (value) *value = row.value;
  if (std_error) *std_error = row.std_error;
  if (threshold) *threshold = row.threshold;
  if (pass) *pass = row.pass ? 1 : 0;
  return SPLAP_OK;
}

size_t splap_result_file_count(const splap_result* result) {
  return result ? result->run.files.size() : 0;
}

const char* splap_result_file(const splap_result* result, size_t index) {
  if (!result || index >= result->run.files.size()) return nullptr;
  return result->run.files[index].c_str();
}

splap_status splap_truncation_eval(const char* spec, double r, double* value, double* d1,
                                   double* d2) {
  if (!spec) return null_argument("spec");
  return guarded([&] {
    const splap::Jet j = splap::RenormSpec::parse(spec).build()(r);
    if (value) *value = j.value;
    if (d1) *d1 = j.d1;
    if (d2) *d2 = j.d2;
  });
}

splap_status splap_implicit_step(size_t n_cells, double length, double dt, double p, double eps,
                                 const double* g, double* w) {
  if (!g || !w) return null_argument("g/w");
  return guarded([&] {
    const splap::Grid1D grid(n_cells, length);
    splap::Resolvent step(grid, dt, p, eps);
    step.solve(std::span<const double>(g, grid.n_interior()), std::span<double>(w, grid.n_interior()));
  });
}

splap_status splap_brownian_increments(uint64_t seed, uint64_t index, size_t steps, double dt,
                                       double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    const auto path = splap::sample_brownian(seed, index, steps, dt);
    std::copy(path.increments.begin(), path.increments.end(), out);
  });
}

}  // extern "C"
