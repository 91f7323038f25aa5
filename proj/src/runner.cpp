#include "splap/runner.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include "json.hpp"
#include <sstream>

#include "splap/error.hpp"
#include "splap/estimators.hpp"
#include "splap/initialdata.hpp"

#ifndef SPLAP_VERSION_STRING
#define SPLAP_VERSION_STRING "0.0.0"
#endif

namespace splap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string label(const std::string& base, const std::string& detail) {
  return base + "[" + detail + "]";
}

std::string dt_tag(double dt) { return "dt=" + num(dt); }

class Report {
 public:
  explicit Report(const ExperimentConfig& cfg) : cfg_(cfg) {}

  void row(const std::string& quantity, double k, const MCResult& r, double dt, double h) {
    csv_ << quantity << ',' << num(k) << ',' << num(r.mean) << ',' << num(r.std_error) << ','
         << r.n << ',' << num(dt) << ',' << num(h) << ',' << cfg_.seed << '\n';
  }
  void value_row(const std::string& quantity, double k, double value, std::size_t n, double dt,
                 double h) {
    csv_ << quantity << ',' << num(k) << ',' << num(value) << ",," << n << ',' << num(dt) << ','
         << num(h) << ',' << cfg_.seed << '\n';
  }

  // Passes iff value <= threshold.
  void at_most(const std::string& q, double value, double se, double threshold) {
    summary_.push_back({q, value, se, threshold, value <= threshold});
  }
  void at_least(const std::string& q, double value, double se, double threshold) {
    summary_.push_back({q, value, se, threshold, value >= threshold});
  }
  void within(const std::string& q, const MCResult& r, double sigmas) {
    const double thr = sigmas * r.std_error;
    summary_.push_back({q, r.mean, r.std_error, thr, std::abs(r.mean) <= thr});
  }
  void info(const std::string& q, double value, double se = kNaN) {
    summary_.push_back({q, value, se, kNaN, true});
  }

  std::string csv_header = "quantity,k,mean,stderr,n,dt,h,seed\n";
  std::ostringstream csv_;
  std::vector<SummaryRow> summary_;

 private:
  const ExperimentConfig& cfg_;
};

// ---------------------------------------------------------------------------

void run_contraction(const ExperimentConfig& cfg, Report& rep) {
  std::vector<ExperimentConfig> runs;
  if (cfg.contraction_refine) {
    const double dts[] = {cfg.dt, cfg.dt / 2.0};
    runs = refinement_configs(cfg, dts);
  } else {
    runs = {cfg};
  }
  std::vector<double> excess;
  for (const auto& run : runs) {
    const ContractionResult r = contraction_check(run);
    for (std::size_t j = 0; j < r.times.size(); ++j) rep.row("distance_l1", r.times[j], r.distance[j], r.dt, r.h);
    for (std::size_t j = 0; j < r.times.size(); ++j) {
      rep.row("ratio", r.times[j], MCResult{r.ratio[j], r.rel_stderr[j], r.distance[j].n, run.seed},
              r.dt, r.h);
    }
    for (const auto& b : r.ito) {
      rep.value_row("ito_correction_max", b.delta, b.max_observed, run.n_paths, r.dt, r.h);
      rep.value_row("ito_correction_bound", b.delta, b.bound, run.n_paths, r.dt, r.h);
    }
    const double se = r.rel_stderr[r.argmax];
    rep.at_most(label("max_ratio", dt_tag(r.dt)), r.max_ratio, se,
                1.0 + cfg.contraction_slack_a * std::sqrt(r.dt) + cfg.contraction_slack_b * se);
    for (const auto& b : r.ito) {
      rep.at_most(label("ito_correction", "delta=" + num(b.delta) + ";" + dt_tag(r.dt)),
                  b.max_observed, kNaN, b.bound);
    }
    rep.info(label("excess", dt_tag(r.dt)), r.excess);
    excess.push_back(r.excess);
  }
  if (excess.size() == 2) rep.at_most("excess_refinement", excess[1], kNaN, excess[0]);
}

void run_energy(const ExperimentConfig& cfg, Report& rep) {
  std::vector<ExperimentConfig> runs;
  if (cfg.energy_refine) {
    const double dts[] = {cfg.dt, cfg.dt / 2.0};
    runs = refinement_configs(cfg, dts);
  } else {
    runs = {cfg};
  }
  std::vector<std::vector<double>> margins;
  for (const auto& run : runs) {
    const EnergyResult r = energy_bound_check(run, cfg.k_levels);
    std::vector<double> m;
    for (const auto& lv : r.levels) {
      rep.row("truncated_energy", lv.k, lv.lhs, r.dt, r.h);
      rep.value_row("energy_constant", lv.k, lv.C, lv.lhs.n, r.dt, r.h);
      rep.at_most(label("energy", "k=" + num(lv.k) + ";" + dt_tag(r.dt)), lv.lhs.mean,
                  lv.lhs.std_error,
                  lv.C * (1.0 + cfg.energy_slack) + cfg.stderr_factor * lv.lhs.std_error);
      m.push_back((lv.C - lv.lhs.mean) / lv.C);
    }
    rep.row("total_energy", kNaN, r.total_energy, r.dt, r.h);
    margins.push_back(std::move(m));
  }
  if (margins.size() == 2) {
    for (std::size_t q = 0; q < cfg.k_levels.size(); ++q) {
      rep.at_least(label("energy_margin_refinement", "k=" + num(cfg.k_levels[q])), margins[1][q],
                   kNaN, margins[0][q]);
    }
  }
}

void run_dissipation(const ExperimentConfig& cfg, Report& rep) {
  std::vector<double> ks;
  for (int k = 0; k <= cfg.dissipation_k_max; ++k) ks.push_back(k);
  const DissipationResult r = dissipation_profile(cfg, ks);
  for (std::size_t q = 0; q < ks.size(); ++q) rep.row("D", ks[q], r.D[q], r.dt, r.h);
  rep.row("total_energy", kNaN, r.total_energy, r.dt, r.h);
  rep.value_row("observed_max", kNaN, r.observed_max, cfg.n_paths, r.dt, r.h);

  const double D0 = r.D.front().mean;
  double level_value = kNaN;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    if (ks[q] == cfg.dissipation_level) level_value = r.D[q].mean;
  }
  if (std::isnan(level_value)) {
    throw Error(Errc::config_error, "dissipation.level must be one of 0..dissipation.k_max");
  }
  rep.at_most(label("D_ratio", "k=" + num(cfg.dissipation_level)),
              D0 > 0.0 ? level_value / D0 : 0.0, kNaN, cfg.dissipation_ratio);
  double beyond = 0.0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    if (ks[q] >= r.observed_max) beyond = std::max(beyond, r.D[q].mean);
  }
  rep.at_most("D_beyond_range", beyond, kNaN, 0.0);
  rep.info("observed_max", r.observed_max);
  rep.info("total_energy", r.total_energy.mean, r.total_energy.std_error);
}

void run_renorm(const ExperimentConfig& cfg, Report& rep) {
  const auto runs = refinement_configs(cfg, cfg.refine_dts);
  const PiecewiseC2 S = cfg.renorm_S.build();
  std::vector<std::vector<RenormResult>> results;
  for (const auto& run : runs) results.push_back(renorm_residual(run, S, cfg.psi));
  for (std::size_t q = 0; q < cfg.psi.size(); ++q) {
    const std::string name(to_string(cfg.psi[q]));
    std::vector<double> rms;
    for (std::size_t d = 0; d < runs.size(); ++d) {
      const RenormResult& r = results[d][q];
      rep.row("renorm_residual_" + name, kNaN, r.signed_residual, r.dt, r.h);
      rep.value_row("renorm_rms_" + name, kNaN, r.rms, r.signed_residual.n, r.dt, r.h);
      rep.within(label("renorm_mean", name + ";" + dt_tag(r.dt)), r.signed_residual,
                 cfg.mean_sigmas);
      rms.push_back(r.rms);
    }
    const double order = loglog_slope(cfg.refine_dts, rms);
    rep.at_least(label("renorm_order", name), order, kNaN, cfg.renorm_min_order);
  }
}

void run_product(const ExperimentConfig& cfg, Report& rep) {
  const double dts[] = {cfg.dt, cfg.dt / 2.0};
  const auto runs = refinement_configs(cfg, dts);
  const PiecewiseC2 H = cfg.product_H.build();
  const PiecewiseC2 Z = cfg.product_Z.build();
  std::vector<double> rms;
  for (const auto& run : runs) {
    const ProductResult r = ito_product_residual(run, H, Z);
    rep.row("product_residual", kNaN, r.signed_residual, r.dt, r.h);
    rep.value_row("product_rms", kNaN, r.rms, r.signed_residual.n, r.dt, r.h);
    rep.within(label("product_mean", dt_tag(r.dt)), r.signed_residual, cfg.mean_sigmas);
    rms.push_back(r.rms);
  }
  rep.at_most("product_rms_refinement", rms[1], kNaN, rms[0]);
}

std::string pair_tag(const LevelPair& p) { return "n=" + num(p.n) + ";m=" + num(p.m); }

LevelStudy levels_for(const ExperimentConfig& cfg) {
  return level_study(cfg, cfg.level_pairs, cfg.monotonicity_k, cfg.hz_H.build(), cfg.hz_Z.build());
}

void run_cauchy(const ExperimentConfig& cfg, Report& rep) {
  const LevelStudy s = levels_for(cfg);
  for (const auto& r : s.pairs) {
    rep.row(label("cauchy_lhs", pair_tag(r.pair)), kNaN, r.cauchy_lhs, s.dt, s.h);
    rep.value_row(label("cauchy_rhs", pair_tag(r.pair)), kNaN, r.cauchy_rhs, r.cauchy_lhs.n, s.dt,
                  s.h);
    rep.at_most(label("cauchy", pair_tag(r.pair)), r.cauchy_lhs.mean, r.cauchy_lhs.std_error,
                r.cauchy_rhs * (1.0 + cfg.cauchy_slack) + cfg.stderr_factor * r.cauchy_lhs.std_error);
  }
  // Raising the lower level with the upper one fixed must not widen the gap.
  for (const auto& a : s.pairs) {
    for (const auto& b : s.pairs) {
      if (a.pair.m == b.pair.m && a.pair.n < b.pair.n) {
        rep.at_most(label("cauchy_trend", pair_tag(b.pair) + "<=" + pair_tag(a.pair)),
                    b.cauchy_lhs.mean, kNaN, a.cauchy_lhs.mean);
      }
    }
  }
}

void run_monotonicity(const ExperimentConfig& cfg, Report& rep) {
  const LevelStudy s = levels_for(cfg);
  for (const auto& r : s.pairs) {
    rep.row(label("monotonicity_gap", pair_tag(r.pair)), s.k, r.monotonicity_gap, s.dt, s.h);
    rep.at_least(label("monotonicity_gap", pair_tag(r.pair)), r.monotonicity_gap.mean,
                 r.monotonicity_gap.std_error, -cfg.stderr_factor * r.monotonicity_gap.std_error);
  }
}

void run_hz(const ExperimentConfig& cfg, Report& rep) {
  const LevelStudy s = levels_for(cfg);
  for (const auto& r : s.pairs) {
    rep.row(label("hz", pair_tag(r.pair)), kNaN, r.hz, s.dt, s.h);
    rep.info(label("hz", pair_tag(r.pair)), r.hz.mean, r.hz.std_error);
  }
}

void run_heat(const ExperimentConfig& cfg, Report& rep) {
  const HeatResult r = heat_convergence(cfg);
  const double X = cfg.length;
  rep.value_row("heat_error", static_cast<double>(r.n_cells), r.error, 1, r.dt,
                X / static_cast<double>(r.n_cells));
  rep.value_row("heat_error", static_cast<double>(r.fine_n_cells), r.fine_error, 1, r.fine_dt,
                X / static_cast<double>(r.fine_n_cells));
  rep.at_most("heat_error", r.error, kNaN, cfg.heat_max_error);
  rep.info("heat_error_fine", r.fine_error);
  rep.at_least("heat_ratio", r.ratio, kNaN, cfg.heat_min_ratio);
}

void run_simulate(const ExperimentConfig& cfg, Report& rep) {
  const Grid1D grid = cfg.grid();
  const GridFunction u0 = make_initial(cfg.u0, grid, 0);
  const Trajectory u = evolve(u0, cfg.noise_model(), brownian_for(cfg, 0), cfg.scheme_for(u0));
  rep.csv_header = "t,node,value\n";
  for (std::size_t j = 0; j < u.states.size(); ++j) {
    if (!cfg.export_trajectory && j != 0 && j + 1 != u.states.size()) continue;
    for (std::size_t i = 0; i <= grid.n_cells(); ++i) {
      rep.csv_ << num(u.times[j]) << ',' << i << ',' << num(u.states[j].at_node(i)) << '\n';
    }
  }
  rep.info("final_l1", l1_norm(u.final_state()));
  rep.info("final_max_abs", u.final_state().max_abs());
  rep.info("initial_l1", l1_norm(u0));
}

using Handler = void (*)(const ExperimentConfig&, Report&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"simulate", run_simulate},
      {"verify-contraction", run_contraction},
      {"verify-energy", run_energy},
      {"verify-dissipation", run_dissipation},
      {"verify-renorm", run_renorm},
      {"verify-ito-product", run_product},
      {"verify-cauchy", run_cauchy},
      {"diag-monotonicity", run_monotonicity},
      {"diag-hz", run_hz},
      {"convergence-heat", run_heat},
  };
  return table;
}

nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for " + path.string());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "simulate",         "verify-contraction", "verify-energy",   "verify-dissipation",
      "verify-renorm",    "verify-ito-product", "verify-cauchy",   "diag-monotonicity",
      "diag-hz",          "convergence-heat"};
  return names;
}

RunResult run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir) {
  const auto it = handlers().find(subcommand);
  if (it == handlers().end()) {
    throw Error(Errc::config_error, "unknown subcommand '" + subcommand + "'");
  }
  if (const auto v = cfg.violations(); !v.empty()) {
    std::string all;
    for (const auto& s : v) all += (all.empty() ? "" : "; ") + s;
    throw Error(Errc::config_error, all);
  }

  const auto start = std::chrono::steady_clock::now();
  Report rep(cfg);
  it->second(cfg, rep);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + out_dir.string() + ": " + ec.message());

  RunResult result;
  result.subcommand = subcommand;
  result.summary = rep.summary_;
  result.seconds = seconds;
  for (const auto& row : result.summary) {
    if (!row.pass) {
      result.passed = false;
      result.failures += (result.failures.empty() ? "" : ", ") + row.quantity;
    }
  }

  const auto csv_path = out_dir / (subcommand + ".csv");
  const auto json_path = out_dir / (subcommand + ".json");
  const auto manifest_path = out_dir / (subcommand + ".manifest.json");
  write_file(csv_path, rep.csv_header + rep.csv_.str());

  nlohmann::json summary = nlohmann::json::array();
  for (const auto& row : result.summary) {
    summary.push_back({{"quantity", row.quantity},
                       {"value", number_or_null(row.value)},
                       {"stderr", number_or_null(row.std_error)},
                       {"threshold", number_or_null(row.threshold)},
                       {"pass", row.pass}});
  }
  write_file(json_path, summary.dump(2) + "\n");

  result.files = {csv_path.string(), json_path.string(), manifest_path.string()};
  nlohmann::json manifest = {
      {"tool", "splap"},
      {"version", SPLAP_VERSION_STRING},
      {"subcommand", subcommand},
      {"timestamp", utc_timestamp()},
      {"seed", cfg.seed},
      {"files", result.files},
      {"duration_seconds", seconds},
      {"passed", result.passed},
      {"config", cfg.echo()},
  };
  write_file(manifest_path, manifest.dump(2) + "\n");
  return result;
}

}  // namespace splap
