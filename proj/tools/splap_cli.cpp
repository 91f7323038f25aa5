// Command-line front end over the C API.
//
//   splap <subcommand> [config] [--seed N] [--paths N] [--dt X] [--workers N]
//                      [--out-dir DIR] [--export-trajectory] [--set key=value ...]
//   splap validate <config>
//   splap echo-config [config] [--set key=value ...]
//
// Exit status: 0 all thresholds met, 1 a threshold failed, 2 configuration
// or IO error, 3 solver failure.

#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splap/splap.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

int exit_code(splap_status s) {
  switch (s) {
    case SPLAP_OK: return kExitOk;
    case SPLAP_ERR_SOLVER:
    case SPLAP_ERR_PATH:
    case SPLAP_ERR_INTERNAL: return kExitSolver;
    default: return kExitConfig;
  }
}

int report(splap_status s) {
  std::fprintf(stderr, "splap: %s: %s\n", splap_status_name(s), splap_last_error());
  return exit_code(s);
}

struct ConfigDeleter {
  void operator()(splap_config* c) const { splap_config_free(c); }
};
struct ResultDeleter {
  void operator()(splap_result* r) const { splap_result_free(r); }
};
using ConfigPtr = std::unique_ptr<splap_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<splap_result, ResultDeleter>;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> paths;
  std::optional<std::string> dt;
  std::optional<long long> workers;
  std::string out_dir = "results";
  bool export_trajectory = false;
  std::vector<std::string> assignments;
};

void add_config_options(CLI::App* sub, Overrides& o) {
  sub->add_option("config", o.config_path, "Configuration file (defaults apply when omitted)");
  sub->add_option("--set", o.assignments, "Override one key, e.g. --set scheme.p=3");
}

void add_run_options(CLI::App* sub, Overrides& o) {
  add_config_options(sub, o);
  sub->add_option("--seed", o.seed, "Master seed (mc.seed)");
  sub->add_option("--paths", o.paths, "Number of Monte Carlo paths (mc.n_paths)");
  sub->add_option("--dt", o.dt, "Time step (time.dt)");
  sub->add_option("--workers", o.workers, "Worker threads (mc.workers)");
  sub->add_option("--out-dir", o.out_dir, "Directory for result files")->capture_default_str();
  sub->add_flag("--export-trajectory", o.export_trajectory,
                "simulate: write every time step, not only the first and last");
}

splap_status build_config(const Overrides& o, ConfigPtr& out) {
  splap_config* raw = nullptr;
  const splap_status s = o.config_path.empty() ? splap_config_default(&raw)
                                               : splap_config_load(o.config_path.c_str(), &raw);
  if (s != SPLAP_OK) return s;
  out.reset(raw);
  auto set = [&](const std::string& key, const std::string& value) {
    return splap_config_set(out.get(), key.c_str(), value.c_str());
  };
  for (const auto& a : o.assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      // Route through the library so the message format stays uniform.
      return set(a, "");
    }
    if (const auto st = set(a.substr(0, eq), a.substr(eq + 1)); st != SPLAP_OK) return st;
  }
  splap_status st = SPLAP_OK;
  if (o.seed && (st = set("mc.seed", std::to_string(*o.seed))) != SPLAP_OK) return st;
  if (o.paths && (st = set("mc.n_paths", std::to_string(*o.paths))) != SPLAP_OK) return st;
  if (o.dt && (st = set("time.dt", *o.dt)) != SPLAP_OK) return st;
  if (o.workers && (st = set("mc.workers", std::to_string(*o.workers))) != SPLAP_OK) return st;
  if (o.export_trajectory && (st = set("output.export_trajectory", "true")) != SPLAP_OK) return st;
  return SPLAP_OK;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

int run(const std::string& subcommand, const Overrides& o) {
  ConfigPtr cfg;
  if (const auto s = build_config(o, cfg); s != SPLAP_OK) return report(s);
  char* violations = nullptr;
  if (splap_config_violation_count(cfg.get()) > 0 &&
      splap_config_violations(cfg.get(), &violations) == SPLAP_OK) {
    std::fprintf(stderr, "splap: invalid configuration:\n%s", violations);
    splap_string_free(violations);
    return kExitConfig;
  }
  splap_result* raw = nullptr;
  if (const auto s = splap_run(subcommand.c_str(), cfg.get(), o.out_dir.c_str(), &raw);
      s != SPLAP_OK) {
    return report(s);
  }
  ResultPtr result(raw);
  const std::size_t n = splap_result_summary_count(result.get());
  for (std::size_t i = 0; i < n; ++i) {
    const char* q = nullptr;
    double value = 0.0, se = 0.0, thr = 0.0;
    int pass = 0;
    splap_result_summary(result.get(), i, &q, &value, &se, &thr, &pass);
    std::printf("%-4s %-48s value=%-12s stderr=%-12s threshold=%s\n",
                std::isnan(thr) ? "INFO" : (pass ? "PASS" : "FAIL"), q, fmt(value).c_str(),
                fmt(se).c_str(), fmt(thr).c_str());
  }
  for (std::size_t i = 0; i < splap_result_file_count(result.get()); ++i) {
    std::printf("wrote %s\n", splap_result_file(result.get(), i));
  }
  if (!splap_result_passed(result.get())) {
    std::fprintf(stderr, "splap: threshold failed: %s\n", splap_result_failures(result.get()));
    return kExitThreshold;
  }
  return kExitOk;
}

int validate(const std::string& path) {
  std::size_t count = 0;
  char* text = nullptr;
  if (const auto s = splap_validate_file(path.c_str(), &count, &text); s != SPLAP_OK) {
    return report(s);
  }
  if (count == 0) {
    std::printf("%s: ok\n", path.c_str());
  } else {
    std::printf("%s: %zu violation(s)\n%s", path.c_str(), count, text);
  }
  splap_string_free(text);
  return count == 0 ? kExitOk : kExitConfig;
}

int echo(const Overrides& o) {
  ConfigPtr cfg;
  if (const auto s = build_config(o, cfg); s != SPLAP_OK) return report(s);
  char* text = nullptr;
  if (const auto s = splap_config_echo(cfg.get(), &text); s != SPLAP_OK) return report(s);
  std::fputs(text, stdout);
  splap_string_free(text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic p-Laplace scheme: simulation and verification experiments"};
  app.set_version_flag("--version", std::string(splap_version()));
  app.require_subcommand(1);

  Overrides o;
  std::string chosen;
  std::istringstream names(splap_subcommands());
  for (std::string name; names >> name;) {
    CLI::App* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    add_run_options(sub, o);
    sub->callback([&chosen, name] { chosen = name; });
  }
  std::string validate_path;
  CLI::App* val = app.add_subcommand("validate", "List every violated configuration invariant");
  val->add_option("config", validate_path, "Configuration file")->required();
  CLI::App* ech = app.add_subcommand("echo-config", "Print the effective configuration");
  add_config_options(ech, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (val->parsed()) return validate(validate_path);
  if (ech->parsed()) return echo(o);
  return run(chosen, o);
}
