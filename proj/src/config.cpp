#include "splap/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "splap/error.hpp"

namespace splap {

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::config_error, what); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    config_error(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    config_error(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

std::size_t to_count(const std::string& key, const std::string& text) {
  const long long v = to_integer(key, text);
  if (v < 0) config_error(key + " must be nonnegative (got " + text + ")");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  config_error(key + ": expected true or false, got '" + text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

// Shortest representation that round-trips.
std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
  return out;
}

void set_initial(InitialSpec& spec, const std::string& key, const std::string& field,
                 const std::string& value) {
  if (field == "kind") {
    const auto k = parse_initial_kind(trim(value));
    if (!k) config_error(key + ": unknown initial datum kind '" + trim(value) + "'");
    spec.kind = *k;
  } else if (field == "amplitude") {
    spec.amplitude = to_double(key, value);
  } else if (field == "mode") {
    spec.mode = static_cast<int>(to_integer(key, value));
  } else if (field == "width") {
    spec.width = to_double(key, value);
  } else if (field == "ramp") {
    spec.ramp = to_double(key, value);
  } else if (field == "center") {
    if (trim(value) == "auto") {
      spec.center.reset();
    } else {
      spec.center = to_double(key, value);
    }
  } else if (field == "alpha") {
    spec.alpha = to_double(key, value);
  } else if (field == "seed") {
    spec.seed = static_cast<std::uint64_t>(to_integer(key, value));
  } else {
    config_error("unknown key '" + key + "'");
  }
}

void echo_initial(std::ostream& os, const std::string& section, const InitialSpec& s) {
  os << "\n[" << section << "]\n";
  os << "kind = " << to_string(s.kind) << "\n";
  os << "amplitude = " << num(s.amplitude) << "\n";
  os << "mode = " << s.mode << "\n";
  os << "width = " << num(s.width) << "\n";
  os << "ramp = " << num(s.ramp) << "\n";
  os << "center = " << (s.center ? num(*s.center) : std::string("auto")) << "\n";
  os << "alpha = " << num(s.alpha) << "\n";
  os << "seed = " << s.seed << "\n";
}

void check_initial(std::vector<std::string>& out, const std::string& section,
                   const InitialSpec& s) {
  try {
    s.validate();
  } catch (const Error& e) {
    out.push_back(section + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------

PiecewiseC2 RenormSpec::build() const {
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      std::ostringstream os;
      os << "renormalizer " << name << " takes " << n << " parameter(s), got " << args.size();
      config_error(os.str());
    }
  };
  if (name == "trunc") return need(1), catalog::trunc(args[0]);
  if (name == "trunc_primitive") return need(1), catalog::trunc_primitive(args[0]);
  if (name == "smooth_trunc") return need(2), catalog::smooth_trunc(args[0], args[1]);
  if (name == "plateau_primitive") return need(1), catalog::plateau_primitive(args[0]);
  if (name == "abs_smooth") return need(1), catalog::abs_smooth(args[0]);
  if (name == "hk_delta") return need(2), catalog::hk_delta(args[0], args[1]);
  if (name == "normalized_hk_delta") return need(2), catalog::normalized_hk_delta(args[0], args[1]);
  if (name == "identity") return need(0), catalog::identity();
  config_error("unknown renormalizer '" + name + "'");
}

std::string RenormSpec::to_string() const { return name + "(" + join(args) + ")"; }

RenormSpec RenormSpec::parse(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  RenormSpec spec;
  spec.args.clear();
  if (open == std::string::npos) {
    spec.name = t;
    return spec;
  }
  if (t.back() != ')') config_error("renormalizer '" + t + "' is missing ')'");
  spec.name = trim(t.substr(0, open));
  spec.args = to_list(spec.name, t.substr(open + 1, t.size() - open - 2));
  return spec;
}

std::string_view to_string(PsiKind kind) noexcept {
  switch (kind) {
    case PsiKind::one: return "one";
    case PsiKind::sin_growing: return "sin_growing";
    case PsiKind::sin: return "sin";
  }
  return "unknown";
}

std::optional<PsiKind> parse_psi_kind(std::string_view name) noexcept {
  for (PsiKind k : {PsiKind::one, PsiKind::sin_growing, PsiKind::sin}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

double TestFunction::value(double t, double x) const {
  switch (kind) {
    case PsiKind::one: return 1.0;
    case PsiKind::sin_growing: return std::sin(std::numbers::pi * x / length) * (1.0 + t);
    case PsiKind::sin: return std::sin(std::numbers::pi * x / length);
  }
  return 0.0;
}

double TestFunction::time_derivative(double, double x) const {
  return kind == PsiKind::sin_growing ? std::sin(std::numbers::pi * x / length) : 0.0;
}

// ---------------------------------------------------------------------------

std::size_t ExperimentConfig::steps() const {
  const double ratio = T / dt;
  return static_cast<std::size_t>(std::llround(ratio));
}

double ExperimentConfig::eps_for(const GridFunction& datum) const {
  if (eps) return *eps;
  if (p >= 2.0) return 0.0;
  double scale = 0.0;
  for (double g : gradient(datum)) scale = std::max(scale, std::abs(g));
  return default_eps(p, scale > 0.0 ? scale : 1.0);
}

SchemeParams ExperimentConfig::scheme_for(const GridFunction& datum) const {
  return SchemeParams{p, eps_for(datum), solver};
}

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> out;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) out.push_back(msg);
  };
  check(n_cells >= 2, "grid.n_cells must be at least 2");
  check(length > 0.0 && std::isfinite(length), "grid.length must be positive");
  check(T > 0.0 && std::isfinite(T), "time.T must be positive");
  check(dt > 0.0 && std::isfinite(dt), "time.dt must be positive");
  if (T > 0.0 && dt > 0.0) {
    check(dt <= T, "time.dt must not exceed time.T");
    check(std::abs(T / dt - std::round(T / dt)) <= 1e-12 * std::max(1.0, T / dt) ||
              std::abs(static_cast<double>(steps()) * dt - T) <= 1e-12,
          "time.dt must divide time.T (to within 1e-12)");
  }
  check(p > 1.0 && std::isfinite(p), "scheme.p must exceed 1");
  if (eps) {
    check(*eps >= 0.0 && std::isfinite(*eps), "scheme.eps must be nonnegative or auto");
    check(!(p < 2.0 && *eps == 0.0), "scheme.eps must be positive when p < 2");
  }
  try {
    solver.validate();
  } catch (const Error& e) {
    out.push_back(std::string("solver: ") + e.what());
  }
  try {
    (void)make_noise(noise);
  } catch (const Error& e) {
    out.push_back(std::string("noise: ") + e.what());
  }
  check_initial(out, "u0", u0);
  check_initial(out, "v0", v0);
  check(n_paths >= 2, "mc.n_paths must be at least 2");
  check(workers >= 1, "mc.workers must be at least 1");
  check(brownian_substeps >= 1, "mc.brownian_substeps must be at least 1");
  for (double k : k_levels) check(k > 0.0, "levels.k entries must be positive");
  for (const auto& pr : level_pairs) {
    check(pr.n > 0.0 && pr.m > 0.0, "levels.pairs entries must be positive");
  }
  check(monotonicity_k > 0.0, "levels.monotonicity_k must be positive");
  for (double d : contraction_deltas) check(d > 0.0, "contraction.deltas entries must be positive");
  check(contraction_slack_a >= 0.0, "contraction.slack_a must be nonnegative");
  check(contraction_slack_b >= 0.0, "contraction.slack_b must be nonnegative");
  check(energy_slack >= 0.0, "energy.slack must be nonnegative");
  check(stderr_factor >= 0.0, "mc.stderr_factor must be nonnegative");
  check(dissipation_k_max >= 0, "dissipation.k_max must be nonnegative");
  check(dissipation_level >= 0.0, "dissipation.level must be nonnegative");
  check(dissipation_ratio > 0.0, "dissipation.ratio must be positive");
  for (const auto* spec : {&renorm_S, &product_H, &product_Z, &hz_H, &hz_Z}) {
    try {
      (void)spec->build();
    } catch (const Error& e) {
      out.push_back(std::string("renormalizer: ") + e.what());
    }
  }
  check(!psi.empty(), "renorm.psi must list at least one test function");
  check(refine_dts.size() >= 2, "renorm.dt_list needs at least two time steps");
  for (double d : refine_dts) {
    check(d > 0.0 && d <= T, "renorm.dt_list entries must lie in (0, time.T]");
    if (d > 0.0) {
      check(std::abs(T / d - std::round(T / d)) <= 1e-9, "renorm.dt_list entries must divide time.T");
    }
  }
  check(mean_sigmas > 0.0, "mc.mean_sigmas must be positive");
  check(cauchy_slack >= 0.0, "cauchy.slack must be nonnegative");
  check(heat_n_cells >= 2, "heat.n_cells must be at least 2");
  check(heat_dt > 0.0 && heat_T > 0.0 && heat_dt <= heat_T, "heat.dt must lie in (0, heat.T]");
  check(heat_max_error > 0.0, "heat.max_error must be positive");
  check(heat_min_ratio > 0.0, "heat.min_ratio must be positive");
  return out;
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  const auto dot = key.find('.');
  const std::string section = dot == std::string::npos ? std::string() : key.substr(0, dot);
  const std::string field = dot == std::string::npos ? key : key.substr(dot + 1);
  const std::string v = trim(value);

  using Setter = std::function<void()>;
  const std::map<std::string, Setter> table = {
      {"grid.n_cells", [&] { n_cells = to_count(key, v); }},
      {"grid.length", [&] { length = to_double(key, v); }},
      {"time.T", [&] { T = to_double(key, v); }},
      {"time.dt", [&] { dt = to_double(key, v); }},
      {"scheme.p", [&] { p = to_double(key, v); }},
      {"scheme.eps",
       [&] {
         if (v == "auto") {
           eps.reset();
         } else {
           eps = to_double(key, v);
         }
       }},
      {"solver.grad_tol", [&] { solver.grad_tol = to_double(key, v); }},
      {"solver.max_iter", [&] { solver.max_iter = static_cast<int>(to_integer(key, v)); }},
      {"solver.armijo_c", [&] { solver.armijo_c = to_double(key, v); }},
      {"solver.backtrack", [&] { solver.backtrack = to_double(key, v); }},
      {"noise.kind",
       [&] {
         const auto k = parse_noise_kind(v);
         if (!k) config_error(key + ": unknown noise kind '" + v + "'");
         noise.kind = *k;
       }},
      {"noise.L", [&] { noise.L = to_double(key, v); }},
      {"noise.M", [&] { noise.M = to_double(key, v); }},
      {"noise.omega", [&] { noise.omega = to_double(key, v); }},
      {"noise.phase", [&] { noise.phase = to_double(key, v); }},
      {"mc.seed", [&] { seed = static_cast<std::uint64_t>(to_integer(key, v)); }},
      {"mc.n_paths",
       [&] {
         const long long n = to_integer(key, v);
         if (n < 0) config_error("mc.n_paths must be at least 2 (got " + v + ")");
         n_paths = static_cast<std::size_t>(n);
       }},
      {"mc.workers", [&] { workers = to_count(key, v); }},
      {"mc.brownian_substeps", [&] { brownian_substeps = to_count(key, v); }},
      {"mc.stderr_factor", [&] { stderr_factor = to_double(key, v); }},
      {"mc.mean_sigmas", [&] { mean_sigmas = to_double(key, v); }},
      {"levels.k", [&] { k_levels = to_list(key, v); }},
      {"levels.pairs",
       [&] {
         level_pairs.clear();
         for (const auto& item : split(v, ',')) {
           const auto colon = item.find(':');
           if (colon == std::string::npos) config_error(key + ": pairs are written n:m");
           level_pairs.push_back(
               {to_double(key, item.substr(0, colon)), to_double(key, item.substr(colon + 1))});
         }
       }},
      {"levels.monotonicity_k", [&] { monotonicity_k = to_double(key, v); }},
      {"contraction.deltas", [&] { contraction_deltas = to_list(key, v); }},
      {"contraction.slack_a", [&] { contraction_slack_a = to_double(key, v); }},
      {"contraction.slack_b", [&] { contraction_slack_b = to_double(key, v); }},
      {"contraction.refine", [&] { contraction_refine = to_bool(key, v); }},
      {"energy.slack", [&] { energy_slack = to_double(key, v); }},
      {"energy.refine", [&] { energy_refine = to_bool(key, v); }},
      {"dissipation.k_max", [&] { dissipation_k_max = static_cast<int>(to_integer(key, v)); }},
      {"dissipation.level", [&] { dissipation_level = to_double(key, v); }},
      {"dissipation.ratio", [&] { dissipation_ratio = to_double(key, v); }},
      {"renorm.S", [&] { renorm_S = RenormSpec::parse(v); }},
      {"renorm.psi",
       [&] {
         psi.clear();
         for (const auto& item : split(v, ',')) {
           const auto k = parse_psi_kind(item);
           if (!k) config_error(key + ": unknown test function '" + item + "'");
           psi.push_back(*k);
         }
       }},
      {"renorm.dt_list", [&] { refine_dts = to_list(key, v); }},
      {"renorm.min_order", [&] { renorm_min_order = to_double(key, v); }},
      {"product.H", [&] { product_H = RenormSpec::parse(v); }},
      {"product.Z", [&] { product_Z = RenormSpec::parse(v); }},
      {"hz.H", [&] { hz_H = RenormSpec::parse(v); }},
      {"hz.Z", [&] { hz_Z = RenormSpec::parse(v); }},
      {"cauchy.slack", [&] { cauchy_slack = to_double(key, v); }},
      {"heat.n_cells", [&] { heat_n_cells = to_count(key, v); }},
      {"heat.dt", [&] { heat_dt = to_double(key, v); }},
      {"heat.T", [&] { heat_T = to_double(key, v); }},
      {"heat.max_error", [&] { heat_max_error = to_double(key, v); }},
      {"heat.min_ratio", [&] { heat_min_ratio = to_double(key, v); }},
      {"output.export_trajectory", [&] { export_trajectory = to_bool(key, v); }},
  };
  if (const auto it = table.find(key); it != table.end()) {
    it->second();
    return;
  }
  if (section == "u0") return set_initial(u0, key, field, v);
  if (section == "v0") return set_initial(v0, key, field, v);
  config_error("unknown key '" + key + "'");
}

namespace {

// Calls `assign(key, value, line_number)` for every assignment in `text`.
template <class Assign>
void scan(const std::string& text, Assign assign) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_error("line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_error("line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    assign(key, trim(line.substr(eq + 1)), lineno);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  scan(text, [&](const std::string& key, const std::string& value, int lineno) {
    try {
      cfg.set(key, value);
    } catch (const Error& e) {
      config_error("line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io_error, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "[grid]\nn_cells = " << n_cells << "\nlength = " << num(length) << "\n";
  os << "\n[time]\nT = " << num(T) << "\ndt = " << num(dt) << "\n";
  os << "\n[scheme]\np = " << num(p) << "\neps = " << (eps ? num(*eps) : std::string("auto"))
     << "\n";
  os << "\n[solver]\ngrad_tol = " << num(solver.grad_tol) << "\nmax_iter = " << solver.max_iter
     << "\narmijo_c = " << num(solver.armijo_c) << "\nbacktrack = " << num(solver.backtrack)
     << "\n";
  os << "\n[noise]\nkind = " << to_string(noise.kind) << "\nL = " << num(noise.L)
     << "\nM = " << num(noise.M) << "\nomega = " << num(noise.omega)
     << "\nphase = " << num(noise.phase) << "\n";
  echo_initial(os, "u0", u0);
  echo_initial(os, "v0", v0);
  os << "\n[mc]\nseed = " << seed << "\nn_paths = " << n_paths << "\nworkers = " << workers
     << "\nbrownian_substeps = " << brownian_substeps << "\nstderr_factor = " << num(stderr_factor)
     << "\nmean_sigmas = " << num(mean_sigmas) << "\n";
  os << "\n[levels]\nk = " << join(k_levels) << "\npairs = ";
  for (std::size_t i = 0; i < level_pairs.size(); ++i) {
    os << (i ? ", " : "") << num(level_pairs[i].n) << ":" << num(level_pairs[i].m);
  }
  os << "\nmonotonicity_k = " << num(monotonicity_k) << "\n";
  os << "\n[contraction]\ndeltas = " << join(contraction_deltas)
     << "\nslack_a = " << num(contraction_slack_a) << "\nslack_b = " << num(contraction_slack_b)
     << "\nrefine = " << (contraction_refine ? "true" : "false") << "\n";
  os << "\n[energy]\nslack = " << num(energy_slack)
     << "\nrefine = " << (energy_refine ? "true" : "false") << "\n";
  os << "\n[dissipation]\nk_max = " << dissipation_k_max << "\nlevel = " << num(dissipation_level)
     << "\nratio = " << num(dissipation_ratio) << "\n";
  os << "\n[renorm]\nS = " << renorm_S.to_string() << "\npsi = ";
  for (std::size_t i = 0; i < psi.size(); ++i) os << (i ? ", " : "") << to_string(psi[i]);
  os << "\ndt_list = " << join(refine_dts) << "\nmin_order = " << num(renorm_min_order) << "\n";
  os << "\n[product]\nH = " << product_H.to_string() << "\nZ = " << product_Z.to_string() << "\n";
  os << "\n[hz]\nH = " << hz_H.to_string() << "\nZ = " << hz_Z.to_string() << "\n";
  os << "\n[cauchy]\nslack = " << num(cauchy_slack) << "\n";
  os << "\n[heat]\nn_cells = " << heat_n_cells << "\ndt = " << num(heat_dt) << "\nT = "
     << num(heat_T) << "\nmax_error = " << num(heat_max_error)
     << "\nmin_ratio = " << num(heat_min_ratio) << "\n";
  os << "\n[output]\nexport_trajectory = " << (export_trajectory ? "true" : "false") << "\n";
  return os.str();
}

std::vector<std::string> validate_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::string> out;
  try {
    scan(text, [&](const std::string& key, const std::string& value, int lineno) {
      try {
        cfg.set(key, value);
      } catch (const Error& e) {
        out.push_back("line " + std::to_string(lineno) + ": " + e.what());
      }
    });
  } catch (const Error& e) {
    out.push_back(e.what());
    return out;
  }
  for (auto& v : cfg.violations()) out.push_back(std::move(v));
  return out;
}

}  // namespace splap
