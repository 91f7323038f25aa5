// Acceptance run: one PASS/FAIL line per criterion.
//
//   splap_acceptance [--criteria 1,2,...] [--workers N]
//
// Exit status 0 iff every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "splap/config.hpp"
#include "splap/error.hpp"
#include "splap/estimators.hpp"
#include "splap/runner.hpp"
#include "splap/truncation_properties.hpp"

namespace {

using namespace splap;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Appends "what=value" and folds `ok` into the verdict.
  void note(const std::string& what, double value, bool ok = true) {
    if (detail.tellp() > 0) detail << ' ';
    detail << what << '=' << value;
    if (!ok) detail << "(!)";
    pass = pass && ok;
  }
};

std::size_t g_workers = 1;

ExperimentConfig base(double p = 2.0) {
  ExperimentConfig cfg;
  cfg.p = p;
  cfg.workers = g_workers;
  return cfg;
}

// Heat equation against its Fourier solution.
void deterministic_exactness(Outcome& o) {
  const HeatResult r = heat_convergence(base());
  o.note("error", r.error, r.error <= 2e-3);
  o.note("fine_error", r.fine_error);
  o.note("ratio", r.ratio, r.ratio >= 1.8);
}

// Criteria 2 and 3 share their paths.
std::vector<ContractionResult> g_contraction;

void contraction_runs() {
  if (!g_contraction.empty()) return;
  for (double p : {2.0, 3.0}) {
    ExperimentConfig cfg = base(p);
    cfg.n_paths = 2000;
    const double dts[] = {cfg.dt, cfg.dt / 2.0};
    for (const auto& run : refinement_configs(cfg, dts)) g_contraction.push_back(contraction_check(run));
  }
}

void contraction(Outcome& o) {
  contraction_runs();
  for (std::size_t q = 0; q < g_contraction.size(); q += 2) {
    const ContractionResult& coarse = g_contraction[q];
    const ContractionResult& fine = g_contraction[q + 1];
    const std::string tag = "p" + std::to_string(q == 0 ? 2 : 3);
    for (const ContractionResult* r : {&coarse, &fine}) {
      const double se = r->rel_stderr[r->argmax];
      std::ostringstream what;
      what << tag << ".max_ratio[dt=" << r->dt << "]";
      o.note(what.str(), r->max_ratio, r->max_ratio <= 1.02 + 3.0 * se);
    }
    o.note(tag + ".excess", coarse.excess);
    // The excess is clamped at 0 (ratio(0) = 1), and a defect already at 0 cannot shrink.
    o.note(tag + ".excess_half_dt", fine.excess, fine.excess < coarse.excess || fine.excess == 0.0);
  }
}

void ito_correction_bound(Outcome& o) {
  contraction_runs();
  std::size_t violations = 0;
  double worst = 0.0;
  for (const auto& r : g_contraction) {
    for (const auto& b : r.ito) {
      violations += b.violations;
      worst = std::max(worst, b.max_observed / b.bound);
    }
  }
  o.note("violating_paths", static_cast<double>(violations), violations == 0);
  o.note("max_observed_over_bound", worst, worst <= 1.0);
}

void energy_bound(Outcome& o) {
  for (double p : {2.0, 3.0}) {
    ExperimentConfig cfg = base(p);
    cfg.n_paths = 2000;
    const double dts[] = {cfg.dt, cfg.dt / 2.0};
    const auto runs = refinement_configs(cfg, dts);
    std::vector<EnergyResult> res;
    for (const auto& run : runs) res.push_back(energy_bound_check(run, cfg.k_levels));
    const std::string tag = "p" + std::to_string(static_cast<int>(p));
    for (std::size_t q = 0; q < cfg.k_levels.size(); ++q) {
      std::ostringstream k;
      k << tag << ".k" << cfg.k_levels[q];
      double margin[2];
      for (std::size_t d = 0; d < 2; ++d) {
        const EnergyBound& lv = res[d].levels[q];
        const bool ok = lv.lhs.mean <= 1.10 * lv.C + 3.0 * lv.lhs.std_error;
        o.note(k.str() + (d == 0 ? ".ratio" : ".ratio_half_dt"), lv.lhs.mean / lv.C, ok);
        margin[d] = (lv.C - lv.lhs.mean) / lv.C;
      }
      o.note(k.str() + ".margin_gain", margin[1] - margin[0], margin[1] >= margin[0]);
    }
  }
}

void dissipation(Outcome& o) {
  ExperimentConfig cfg = base();
  cfg.u0 = spike_datum(10.0);
  cfg.n_paths = 500;
  std::vector<double> ks;
  for (int k = 0; k <= 9; ++k) ks.push_back(k);
  const DissipationResult r = dissipation_profile(cfg, ks);
  const double D0 = r.D[0].mean;
  o.note("D0", D0);
  o.note("D8_over_D0", r.D[8].mean / D0, r.D[8].mean <= 0.1 * D0);
  o.note("observed_max", r.observed_max);
  double beyond = 0.0;
  for (std::size_t q = 0; q < ks.size(); ++q) {
    if (ks[q] >= r.observed_max) beyond = std::max(beyond, r.D[q].mean);
  }
  o.note("max_D_beyond_range", beyond, beyond == 0.0);
}

void renorm(Outcome& o) {
  ExperimentConfig cfg = base();
  cfg.n_paths = 1000;
  const auto runs = refinement_configs(cfg, cfg.refine_dts);
  const PiecewiseC2 S = catalog::hk_delta(2.0, 0.5);
  std::vector<std::vector<RenormResult>> res;
  for (const auto& run : runs) res.push_back(renorm_residual(run, S, cfg.psi));
  for (std::size_t q = 0; q < cfg.psi.size(); ++q) {
    const std::string name(to_string(cfg.psi[q]));
    std::vector<double> rms;
    double worst_sigma = 0.0;
    for (std::size_t d = 0; d < runs.size(); ++d) {
      const RenormResult& r = res[d][q];
      rms.push_back(r.rms);
      worst_sigma = std::max(worst_sigma, std::abs(r.signed_residual.mean) / r.signed_residual.std_error);
    }
    bool decreasing = true;
    for (std::size_t d = 1; d < rms.size(); ++d) decreasing = decreasing && rms[d] < rms[d - 1];
    o.note(name + ".rms_finest", rms.back(), decreasing);
    const double order = loglog_slope(cfg.refine_dts, rms);
    o.note(name + ".order", order, order >= 0.4);
    o.note(name + ".max_mean_sigmas", worst_sigma, worst_sigma <= 4.0);
  }
}

void ito_product(Outcome& o) {
  ExperimentConfig cfg = base();
  cfg.n_paths = 2000;
  cfg.dt = 1.25e-4;
  const double dts[] = {cfg.dt, cfg.dt / 2.0};
  const auto runs = refinement_configs(cfg, dts);
  const PiecewiseC2 H = catalog::hk_delta(3.0, 0.5);
  const PiecewiseC2 Z = catalog::trunc_primitive(1.0);
  std::vector<double> rms;
  for (const auto& run : runs) {
    const ProductResult r = ito_product_residual(run, H, Z);
    std::ostringstream tag;
    tag << "mean_sigmas[dt=" << r.dt << "]";
    const double sig = std::abs(r.signed_residual.mean) / r.signed_residual.std_error;
    o.note(tag.str(), sig, sig <= 4.0);
    rms.push_back(r.rms);
  }
  o.note("rms", rms[0]);
  o.note("rms_half_dt", rms[1], rms[1] < rms[0]);
}

void cauchy(Outcome& o) {
  ExperimentConfig cfg = base();
  cfg.u0 = spike_datum(10.0);
  cfg.n_paths = 500;
  const LevelPair pairs[] = {{2.0, 8.0}, {4.0, 8.0}};
  const LevelStudy s =
      level_study(cfg, pairs, cfg.monotonicity_k, cfg.hz_H.build(), cfg.hz_Z.build());
  for (const auto& r : s.pairs) {
    std::ostringstream tag;
    tag << "gap[" << r.pair.n << ':' << r.pair.m << "]";
    o.note(tag.str(), r.cauchy_lhs.mean,
           r.cauchy_lhs.mean <= 1.05 * r.cauchy_rhs + 3.0 * r.cauchy_lhs.std_error);
    o.note(tag.str() + ".initial", r.cauchy_rhs);
  }
  o.note("gap_4_8_minus_2_8", s.pairs[1].cauchy_lhs.mean - s.pairs[0].cauchy_lhs.mean,
         s.pairs[1].cauchy_lhs.mean <= s.pairs[0].cauchy_lhs.mean);
}

void truncation_library(Outcome& o) {
  const auto checks = truncation_property_suite(1000000);
  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (!c.ok()) {
      ++failed;
      o.detail << (o.detail.tellp() > 0 ? " " : "") << c.name << "(!)";
    }
  }
  o.note("properties", static_cast<double>(checks.size()));
  o.note("failed", static_cast<double>(failed), failed == 0);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void reproducibility(Outcome& o) {
  ExperimentConfig cfg = base();
  cfg.n_paths = 12;
  cfg.n_cells = 32;
  cfg.T = 0.04;
  cfg.refine_dts = {4e-3, 2e-3, 1e-3};
  const auto root = std::filesystem::temp_directory_path() /
                    ("splap_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::size_t mismatches = 0;
  std::size_t compared = 0;
  for (const auto& sub : subcommands()) {
    if (sub.rfind("verify-", 0) != 0) continue;
    std::vector<std::string> csv;
    int run_no = 0;
    for (std::size_t workers : {std::size_t{1}, std::size_t{1}, std::size_t{3}}) {
      ExperimentConfig c = cfg;
      c.workers = workers;
      const auto dir = root / std::to_string(run_no++);
      run_subcommand(sub, c, dir);
      csv.push_back(slurp(dir / (sub + ".csv")));
    }
    ++compared;
    if (csv[0].empty() || csv[0] != csv[1] || csv[0] != csv[2]) {
      ++mismatches;
      o.detail << (o.detail.tellp() > 0 ? " " : "") << sub << "(!)";
    }
  }
  std::filesystem::remove_all(root);
  o.note("subcommands", static_cast<double>(compared));
  o.note("mismatches", static_cast<double>(mismatches), mismatches == 0 && compared > 0);
}

struct Criterion {
  int id;
  const char* name;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the stochastic p-Laplace scheme"};
  std::vector<int> selected;
  app.add_option("--criteria", selected, "Run only these criteria")->delimiter(',');
  app.add_option("--workers", g_workers, "Worker threads for Monte Carlo runs")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "deterministic_exactness", deterministic_exactness},
      {2, "contraction", contraction},
      {3, "ito_correction_bound", ito_correction_bound},
      {4, "energy_bound", energy_bound},
      {5, "energy_dissipation", dissipation},
      {6, "renormalized_residual", renorm},
      {7, "ito_product_residual", ito_product},
      {8, "cauchy_in_truncation", cauchy},
      {9, "truncation_library", truncation_library},
      {10, "reproducibility", reproducibility},
  };
  const std::set<int> only(selected.begin(), selected.end());
  bool all_pass = true;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << (o.detail.tellp() > 0 ? " " : "") << "error: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %-4s %-24s %6.1fs  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                o.detail.str().c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
