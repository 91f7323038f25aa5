#include "splap/estimators.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "splap/error.hpp"
#include "splap/initialdata.hpp"

namespace splap {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

MCResult summarize(std::span<const double> samples, std::uint64_t seed) {
  if (samples.size() < 2) throw_invalid("Monte Carlo summary needs at least two samples");
  const double n = static_cast<double>(samples.size());
  CompensatedSum sum;
  for (double x : samples) sum.add(x);
  const double mean = sum.value() / n;
  CompensatedSum sq;
  for (double x : samples) sq.add((x - mean) * (x - mean));
  const double var = sq.value() / (n - 1.0);
  return MCResult{mean, std::sqrt(var / n), samples.size(), seed};
}

double root_mean_square(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  CompensatedSum sq;
  for (double x : samples) sq.add(x * x);
  return std::sqrt(sq.value() / static_cast<double>(samples.size()));
}

std::vector<std::vector<double>> run_paths(std::size_t n_paths, std::size_t workers,
                                           const PathObservables& observe) {
  if (n_paths < 2) throw_invalid("Monte Carlo runs need n_paths >= 2");
  std::vector<std::vector<double>> out(n_paths);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t first_failure = std::numeric_limits<std::size_t>::max();
  Errc failure_code = Errc::invalid_argument;
  std::string failure_what;
  std::exception_ptr foreign;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_paths) return;
      {
        std::lock_guard lock(mu);
        if (i > first_failure) return;
      }
      try {
        out[i] = observe(i);
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (i < first_failure) {
          first_failure = i;
          failure_code = e.code();
          failure_what = e.what();
          foreign = nullptr;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < first_failure) {
          first_failure = i;
          foreign = std::current_exception();
        }
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(workers, 1, n_paths);
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  if (first_failure != std::numeric_limits<std::size_t>::max()) {
    if (foreign) std::rethrow_exception(foreign);
    std::ostringstream os;
    os << "path " << first_failure << " failed: " << failure_what;
    throw PathFailure(failure_code, first_failure, os.str());
  }
  return out;
}

std::vector<double> column(const std::vector<std::vector<double>>& table, std::size_t c) {
  std::vector<double> out;
  out.reserve(table.size());
  for (const auto& row : table) out.push_back(row.at(c));
  return out;
}

MCResult mc_expectation(const PathExperiment& experiment, std::size_t n_paths,
                        std::uint64_t master_seed, std::size_t workers) {
  const auto table = run_paths(n_paths, workers, [&](std::uint64_t i) {
    return std::vector<double>{experiment(master_seed, i)};
  });
  return summarize(column(table, 0), master_seed);
}

BrownianPath brownian_for(const ExperimentConfig& cfg, std::uint64_t index) {
  const std::size_t sub = std::max<std::size_t>(cfg.brownian_substeps, 1);
  const std::size_t steps = cfg.steps();
  BrownianPath path =
      sample_brownian(cfg.seed, index, steps * sub, cfg.dt / static_cast<double>(sub));
  if (sub > 1) path = path.coarsen(sub);
  path.dt = cfg.dt;
  return path;
}

std::vector<ExperimentConfig> refinement_configs(const ExperimentConfig& cfg,
                                                 std::span<const double> dts) {
  if (dts.empty()) throw_invalid("refinement needs at least one time step");
  const double finest = *std::min_element(dts.begin(), dts.end());
  require_positive(finest, "refinement time step");
  std::vector<ExperimentConfig> out;
  for (double dt : dts) {
    const double ratio = dt / finest;
    const double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-9 * r) {
      throw_invalid("refinement time steps must be integer multiples of the smallest one");
    }
    ExperimentConfig c = cfg;
    c.dt = dt;
    c.brownian_substeps = static_cast<std::size_t>(r) * std::max<std::size_t>(cfg.brownian_substeps, 1);
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

void require_runnable(const ExperimentConfig& cfg) {
  const auto v = cfg.violations();
  if (!v.empty()) throw Error(Errc::config_error, v.front());
}

// Flux on every edge of u.
void fluxes(const GridFunction& u, double p, double eps, std::vector<double>& grad,
            std::vector<double>& flux) {
  grad = gradient(u);
  flux.resize(grad.size());
  for (std::size_t e = 0; e < grad.size(); ++e) flux[e] = p_flux(grad[e], p, eps);
}

// Endpoints of the deterministic half of step j -> j+1, which runs from
// g = u^j + Phi(t_j, u^j) dbeta_j to u^{j+1}. Both vectors cover nodes 0..N
// with zero boundary values.
struct Substep {
  std::vector<double> start, end;
};

void substep(const Trajectory& traj, const NoiseModel& noise, std::size_t j, Substep& out) {
  const GridFunction& a = traj.states[j];
  const GridFunction& b = traj.states[j + 1];
  const double t = traj.times[j];
  const double db = traj.path.increments[j];
  const std::size_t N = a.grid().n_cells();
  out.start.assign(N + 1, 0.0);
  out.end.assign(N + 1, 0.0);
  for (std::size_t q = 0; q < a.size(); ++q) {
    out.start[q + 1] = a[q] + noise(t, a[q]) * db;
    out.end[q + 1] = b[q];
  }
}

// Average of f(x(s), y(s)) over s in [0, 1] along the segments
// x(s) = x0 + s (x1 - x0), y(s) = y0 + s (y1 - y0). The segment is cut where x
// crosses a breakpoint in `xb` or x - y crosses one in `rb`; 3-point
// Gauss-Legendre on each piece is exact for the piecewise quadratics of the
// catalog. f returns K values, averaged componentwise.
template <std::size_t K, class F>
std::array<double, K> segment_average(F f, double x0, double x1, double y0, double y1,
                                      std::span<const double> xb, std::span<const double> rb,
                                      std::vector<double>& cuts) {
  static constexpr double kNode = 0.7745966692414834;  // sqrt(3/5)
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double dr = dx - dy;
  const double r0 = x0 - y0;
  cuts.clear();
  cuts.push_back(0.0);
  for (double c : xb) {
    const double s = dx != 0.0 ? (c - x0) / dx : -1.0;
    if (s > 0.0 && s < 1.0) cuts.push_back(s);
  }
  for (double c : rb) {
    const double s = dr != 0.0 ? (c - r0) / dr : -1.0;
    if (s > 0.0 && s < 1.0) cuts.push_back(s);
  }
  cuts.push_back(1.0);
  if (cuts.size() > 3) std::sort(cuts.begin(), cuts.end());
  std::array<double, K> acc{};
  const auto add = [&](double s, double w) {
    const std::array<double, K> v = f(x0 + s * dx, y0 + s * dy);
    for (std::size_t k = 0; k < K; ++k) acc[k] += w * v[k];
  };
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double half = 0.5 * (cuts[c + 1] - cuts[c]);
    if (half <= 0.0) continue;
    const double mid = 0.5 * (cuts[c] + cuts[c + 1]);
    add(mid - half * kNode, half * 5.0 / 9.0);
    add(mid, half * 8.0 / 9.0);
    add(mid + half * kNode, half * 5.0 / 9.0);
  }
  return acc;
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return a.grid().h() * s;
}

}  // namespace

// ---------------------------------------------------------------------------

ContractionResult contraction_check(const ExperimentConfig& cfg) {
  require_runnable(cfg);
  const Grid1D grid = cfg.grid();
  const NoiseModel noise = cfg.noise_model();
  const std::size_t J = cfg.steps();
  const double h = grid.h();
  std::vector<PiecewiseC2> N;
  for (double d : cfg.contraction_deltas) N.push_back(catalog::abs_smooth(d));

  const auto table = run_paths(cfg.n_paths, cfg.workers, [&](std::uint64_t i) {
    const GridFunction u0 = make_initial(cfg.u0, grid, i);
    const GridFunction v0 = make_initial(cfg.v0, grid, i);
    const auto [u, v] = evolve_coupled(u0, v0, noise, brownian_for(cfg, i), cfg.scheme_for(u0));
    std::vector<double> obs(J + 1 + N.size() + 1, 0.0);
    bool nonmonotone = false;
    for (std::size_t j = 0; j <= J; ++j) {
      obs[j] = l1_distance(u.states[j], v.states[j]);
      if (j > 0 && obs[j] > obs[j - 1] * (1.0 + 1e-12) + 1e-300) nonmonotone = true;
    }
    for (std::size_t j = 0; j < J; ++j) {
      const double t = u.times[j];
      const auto& uj = u.states[j];
      const auto& vj = v.states[j];
      for (std::size_t d = 0; d < N.size(); ++d) {
        double s = 0.0;
        for (std::size_t q = 0; q < uj.size(); ++q) {
          const double curv = N[d].d2(uj[q] - vj[q]);
          if (curv == 0.0) continue;
          const double dphi = noise(t, uj[q]) - noise(t, vj[q]);
          s += curv * dphi * dphi;
        }
        obs[J + 1 + d] += cfg.dt * h * s;
      }
    }
    obs.back() = nonmonotone ? 1.0 : 0.0;
    return obs;
  });

  ContractionResult r;
  r.dt = cfg.dt;
  r.h = h;
  for (std::size_t j = 0; j <= J; ++j) {
    r.times.push_back(static_cast<double>(j) * cfg.dt);
    r.distance.push_back(summarize(column(table, j), cfg.seed));
  }
  r.initial_distance = r.distance.front().mean;
  if (!(r.initial_distance > 0.0)) throw_invalid("contraction check needs u0 != v0");
  for (std::size_t j = 0; j <= J; ++j) {
    r.ratio.push_back(r.distance[j].mean / r.initial_distance);
    r.rel_stderr.push_back(r.distance[j].std_error / r.initial_distance);
    if (r.ratio[j] > r.ratio[r.argmax]) r.argmax = j;
  }
  r.max_ratio = r.ratio[r.argmax];
  r.excess = std::max(0.0, r.max_ratio - 1.0);
  const double L = noise.lipschitz();
  for (std::size_t d = 0; d < N.size(); ++d) {
    ItoCorrectionBound b;
    b.delta = cfg.contraction_deltas[d];
    b.bound = b.delta * L * L * cfg.T * grid.length();
    for (const auto& row : table) {
      const double q = row[J + 1 + d];
      b.max_observed = std::max(b.max_observed, q);
      if (q > b.bound) ++b.violations;
    }
    r.ito.push_back(b);
  }
  for (const auto& row : table) r.nonmonotone_paths += row.back() != 0.0 ? 1 : 0;
  return r;
}

// ---------------------------------------------------------------------------

double energy_constant(double T, double L, double k, double length, double u0_l1) {
  return T * L * L * k * k * length / 2.0 + k * u0_l1;
}

EnergyResult energy_bound_check(const ExperimentConfig& cfg, std::span<const double> k_levels) {
  require_runnable(cfg);
  for (double k : k_levels) require_positive(k, "energy level k");
  const Grid1D grid = cfg.grid();
  const NoiseModel noise = cfg.noise_model();
  const std::size_t K = k_levels.size();

  const auto table = run_paths(cfg.n_paths, cfg.workers, [&](std::uint64_t i) {
    const GridFunction u0 = make_initial(cfg.u0, grid, i);
    const Trajectory u = evolve(u0, noise, brownian_for(cfg, i), cfg.scheme_for(u0));
    std::vector<double> obs(K + 2, 0.0);
    for (std::size_t j = 1; j < u.states.size(); ++j) {
      for (std::size_t q = 0; q < K; ++q) {
        obs[q] += cfg.dt * truncated_gradient_energy(u.states[j], k_levels[q], cfg.p);
      }
      obs[K] += cfg.dt * gradient_energy(u.states[j], cfg.p);
    }
    obs[K + 1] = l1_norm(u0);
    return obs;
  });

  EnergyResult r;
  r.dt = cfg.dt;
  r.h = grid.h();
  r.L = noise.lipschitz();
  r.total_energy = summarize(column(table, K), cfg.seed);
  r.u0_l1 = summarize(column(table, K + 1), cfg.seed).mean;
  for (std::size_t q = 0; q < K; ++q) {
    r.levels.push_back({k_levels[q], summarize(column(table, q), cfg.seed),
                        energy_constant(cfg.T, r.L, k_levels[q], grid.length(), r.u0_l1)});
  }
  return r;
}

DissipationResult dissipation_profile(const ExperimentConfig& cfg, std::span<const double> ks) {
  require_runnable(cfg);
  for (std::size_t q = 0; q < ks.size(); ++q) {
    if (!(ks[q] >= 0.0)) throw_invalid("dissipation levels must be nonnegative");
    if (q > 0 && !(ks[q] > ks[q - 1])) throw_invalid("dissipation levels must be ascending");
  }
  const Grid1D grid = cfg.grid();
  const NoiseModel noise = cfg.noise_model();
  const std::size_t K = ks.size();

  const auto table = run_paths(cfg.n_paths, cfg.workers, [&](std::uint64_t i) {
    const GridFunction u0 = make_initial(cfg.u0, grid, i);
    const Trajectory u = evolve(u0, noise, brownian_for(cfg, i), cfg.scheme_for(u0));
    std::vector<double> obs(K + 2, 0.0);
    obs[K + 1] = u0.max_abs();
    for (std::size_t j = 1; j < u.states.size(); ++j) {
      for (std::size_t q = 0; q < K; ++q) {
        obs[q] += cfg.dt * levelset_gradient_integral(u.states[j], cfg.p, ks[q], ks[q] + 1.0);
      }
      obs[K] += cfg.dt * gradient_energy(u.states[j], cfg.p);
      obs[K + 1] = std::max(obs[K + 1], u.states[j].max_abs());
    }
    return obs;
  });

  DissipationResult r;
  r.dt = cfg.dt;
  r.h = grid.h();
  r.ks.assign(ks.begin(), ks.end());
  for (std::size_t q = 0; q < K; ++q) r.D.push_back(summarize(column(table, q), cfg.seed));
  r.total_energy = summarize(column(table, K), cfg.seed);
  for (const auto& row : table) r.observed_max = std::max(r.observed_max, row[K + 1]);
  return r;
}

// ---------------------------------------------------------------------------

void check_renorm_admissible(const PiecewiseC2& S, const TestFunction& psi) {
  if (psi.vanishes_on_boundary()) return;
  if (S.d1(0.0) != 0.0) {
    throw_invalid("renormalizer " + S.name() +
                  " has S'(0) != 0; use a test function vanishing on the boundary");
  }
}

double renorm_path_residual(const Trajectory& traj, const NoiseModel& noise, double p, double eps,
                            const PiecewiseC2& S, const TestFunction& psi,
                            std::vector<double>* terms) {
  check_renorm_admissible(S, psi);
  const Grid1D& grid = traj.states.front().grid();
  const double h = grid.h();
  const std::size_t J = traj.steps();
  const std::size_t N = grid.n_cells();
  const double dt = traj.path.dt;
  const double T = traj.times.back();

  auto interior = [&](const GridFunction& u, double t, auto f) {
    double s = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) s += f(S(u[q]), u[q], t, grid.x(q + 1));
    return h * s;
  };

  const double B =
      interior(traj.states[J], T, [&](Jet s, double, double t, double x) { return s.value * psi.value(t, x); }) -
      interior(traj.states[0], 0.0, [&](Jet s, double, double, double x) { return s.value * psi.value(0.0, x); });

  // The flux terms pair phi(D u^j) with the average of S' over the
  // deterministic substep. The chain rule S(u^j) - S(g) is then exact, so the residual is left with
  // martingale increments and the weak error of the noise update.
  double A1 = 0.0;
  double A2 = 0.0;
  std::vector<double> grad, flux, sp, ps, cuts;
  Substep nodes;
  for (std::size_t j = 1; j <= J; ++j) {
    const double t = traj.times[j];
    fluxes(traj.states[j], p, eps, grad, flux);
    substep(traj, noise, j - 1, nodes);
    sp.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
      sp[i] = segment_average<1>([&](double x, double) { return std::array{S.d1(x)}; },
                                 nodes.start[i], nodes.end[i], 0.0, 0.0, S.breakpoints(), {},
                                 cuts)[0];
    }
    ps.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) ps[i] = psi.value(t, grid.x(i));
    double a1 = 0.0;
    double a2 = 0.0;
    for (std::size_t e = 0; e < N; ++e) {
      a1 += flux[e] * (sp[e + 1] - sp[e]) * 0.5 * (ps[e] + ps[e + 1]);
      a2 += 0.5 * (sp[e] + sp[e + 1]) * flux[e] * (ps[e + 1] - ps[e]);
    }
    // h * sum_e (...)/h: the edge weights cancel the difference quotients.
    A1 += dt * a1;
    A2 += dt * a2;
  }

  double I = 0.0;
  double P = 0.0;
  double C = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double t = traj.times[j];
    const GridFunction& u = traj.states[j];
    double ito = 0.0;
    double pt = 0.0;
    double corr = 0.0;
    for (std::size_t q = 0; q < u.size(); ++q) {
      const double x = grid.x(q + 1);
      const Jet s = S(u[q]);
      const double w = psi.value(t, x);
      const double phi = noise(t, u[q]);
      ito += s.d1 * w * phi;
      pt += s.value * psi.time_derivative(t, x);
      corr += s.d2 * w * phi * phi;
    }
    I += h * ito * traj.path.increments[j];
    P += dt * h * pt;
    C += 0.5 * dt * h * corr;
  }

  if (terms) *terms = {B, A1, A2, I, P, C};
  return B + A1 + A2 - I - P - C;
}

std::vector<RenormResult> renorm_residual(const ExperimentConfig& cfg, const PiecewiseC2& S,
                                          std::span<const PsiKind> psi) {
  require_runnable(cfg);
  if (psi.empty()) throw_invalid("renorm_residual needs at least one test function");
  std::vector<TestFunction> tests;
  for (PsiKind k : psi) {
    tests.push_back({k, cfg.length});
    check_renorm_admissible(S, tests.back());
  }
  const Grid1D grid = cfg.grid();
  const NoiseModel noise = cfg.noise_model();
  constexpr std::size_t kTerms = 6;
  const std::size_t stride = kTerms + 1;

  const auto table = run_paths(cfg.n_paths, cfg.workers, [&](std::uint64_t i) {
    const GridFunction u0 = make_initial(cfg.u0, grid, i);
    const SchemeParams scheme = cfg.scheme_for(u0);
    const Trajectory u = evolve(u0, noise, brownian_for(cfg, i), scheme);
    std::vector<double> obs;
    std::vector<double> terms;
    for (const auto& test : tests) {
      obs.push_back(renorm_path_residual(u, noise, scheme.p, scheme.eps, S, test, &terms));
      obs.insert(obs.end(), terms.begin(), terms.end());
    }
    return obs;
  });

  std::vector<RenormResult> out;
  for (std::size_t q = 0; q < tests.size(); ++q) {
    RenormResult r;
    r.psi = tests[q].kind;
    r.dt = cfg.dt;
    r.h = grid.h();
    const auto res = column(table, q * stride);
    r.signed_residual = summarize(res, cfg.seed);
    r.rms = root_mean_square(res);
    for (std::size_t t = 0; t < kTerms; ++t) {
      r.term_means.push_back(summarize(column(table, q * stride + 1 + t), cfg.seed).mean);
    }
    out.push_back(std::move(r));
  }
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw_invalid("loglog_slope needs two or more points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw_invalid("loglog_slope needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw_invalid("loglog_slope needs distinct abscissae");
  return sxy / sxx;
}

// ---------------------------------------------------------------------------

void check_product_pair(const PiecewiseC2&, const PiecewiseC2& Z) {
  const Jet z = Z(0.0);
  if (z.value != 0.0 || z.d1 != 0.0) {
    throw_invalid("product rule needs Z(0) = Z'(0) = 0; " + Z.name() + " violates it");
  }
}

double product_path_residual(const Trajectory& u, const Trajectory& v, const NoiseModel& noise,
                             double p, double eps, const PiecewiseC2& H, const PiecewiseC2& Z) {
  check_product_pair(H, Z);
  const Grid1D& grid = u.states.front().grid();
  const double h = grid.h();
  const std::size_t J = u.steps();
  const std::size_t N = grid.n_cells();
  const double dt = u.path.dt;

  auto pairing = [&](const GridFunction& a, const GridFunction& b) {
    double s = 0.0;
    for (std::size_t q = 0; q < a.size(); ++q) s += Z.value(a[q] - b[q]) * H.value(a[q]);
    return h * s;
  };
  const double lhs = pairing(u.states[J], v.states[J]) - pairing(u.states[0], v.states[0]);

  // Nodal factors averaged over the deterministic substep as in
  // renorm_path_residual.
  double T1 = 0.0;
  double T2 = 0.0;
  std::vector<double> gu, fu, gv, fv, a, b, cuts;
  Substep nu, nv;
  for (std::size_t j = 1; j <= J; ++j) {
    fluxes(u.states[j], p, eps, gu, fu);
    fluxes(v.states[j], p, eps, gv, fv);
    substep(u, noise, j - 1, nu);
    substep(v, noise, j - 1, nv);
    a.resize(N + 1);
    b.resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
      const auto ab = segment_average<2>(
          [&](double x, double y) {
            const Jet hx = H(x);
            const Jet zr = Z(x - y);
            return std::array{hx.value * zr.d1, hx.d1 * zr.value};
          },
          nu.start[i], nu.end[i], nv.start[i], nv.end[i], H.breakpoints(), Z.breakpoints(), cuts);
      a[i] = ab[0];
      b[i] = ab[1];
    }
    double t1 = 0.0;
    double t2 = 0.0;
    for (std::size_t e = 0; e < N; ++e) {
      t1 += (fu[e] - fv[e]) * (a[e + 1] - a[e]);
      t2 += fu[e] * (b[e + 1] - b[e]);
    }
    T1 -= dt * t1;
    T2 -= dt * t2;
  }

  double T3 = 0.0, T4 = 0.0, T5 = 0.0, T6 = 0.0, T7 = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const double t = u.times[j];
    const double db = u.path.increments[j];
    const GridFunction& uj = u.states[j];
    const GridFunction& vj = v.states[j];
    double s3 = 0.0, s4 = 0.0, s5 = 0.0, s6 = 0.0, s7 = 0.0;
    for (std::size_t q = 0; q < uj.size(); ++q) {
      const Jet hh = H(uj[q]);
      const Jet zz = Z(uj[q] - vj[q]);
      const double pu = noise(t, uj[q]);
      const double dp = pu - noise(t, vj[q]);
      s3 += pu * hh.d1 * zz.value;
      s4 += pu * pu * hh.d2 * zz.value;
      s5 += dp * dp * zz.d2 * hh.value;
      s6 += dp * zz.d1 * hh.value;
      s7 += dp * zz.d1 * pu * hh.d1;
    }
    T3 += h * s3 * db;
    T4 += 0.5 * dt * h * s4;
    T5 += 0.5 * dt * h * s5;
    T6 += h * s6 * db;
    T7 += dt * h * s7;
  }
  return lhs - (T1 + T2 + T3 + T4 + T5 + T6 + T7);
}

ProductResult ito_product_residual(const ExperimentConfig& cfg, const PiecewiseC2& H,
                                   const PiecewiseC2& Z) {
  require_runnable(cfg);
  check_product_pair(H, Z);
  const Grid1D grid = cfg.grid();
  const NoiseModel noise = cfg.noise_model();

  const auto table = run_paths(cfg.n_paths, cfg.workers, [&](std::uint64_t i) {
    const GridFunction u0 = make_initial(cfg.u0, grid, i);
    const GridFunction v0 = make_initial(cfg.v0, grid, i);
    const SchemeParams scheme = cfg.scheme_for(u0);
    const auto [u, v] = evolve_coupled(u0, v0, noise, brownian_for(cfg, i), scheme);
    return std::vector<double>{product_path_residual(u, v, noise, scheme.p, scheme.eps, H, Z)};
  });
  ProductResult r;
  const auto res = column(table, 0);
  r.signed_residual = summarize(res, cfg.seed);
  r.rms = root_mean_square(res);
  r.dt = cfg.dt;
  r.h = grid.h();
  return r;
}

// ---------------------------------------------------------------------------

LevelStudy level_study(const ExperimentConfig& cfg, std::span<const LevelPair> pairs, double k,
                       const PiecewiseC2& H, const PiecewiseC2& Z) {
  require_runnable(cfg);
  require_positive(k, "monotonicity level k");
  check_product_pair(H, Z);
  if (pairs.empty()) throw_invalid("level study needs at least one (n, m) pair");
  std::set<double> level_set;
  for (const auto& pr : pairs) {
    require_positive(pr.n, "truncation level n");
    require_positive(pr.m, "truncation level m");
    level_set.insert(pr.n);
    level_set.insert(pr.m);
  }
  const std::vector<double> levels(level_set.begin(), level_set.end());
  auto slot = [&](double l) {
    return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), l) - levels.begin());
  };
  const Grid1D grid = cfg.grid();
  const NoiseModel noise = cfg.noise_model();
  const double h = grid.h();
  const std::size_t N = grid.n_cells();
  constexpr std::size_t kObs = 4;

  const auto table = run_paths(cfg.n_paths, cfg.workers, [&](std::uint64_t i) {
    const GridFunction u0 = make_initial(cfg.u0, grid, i);
    std::vector<GridFunction> data;
    for (double l : levels) data.push_back(truncate_initial(u0, l));
    // One eps for all levels so the runs differ only through their data.
    const SchemeParams scheme = cfg.scheme_for(u0);
    const auto runs = evolve_group(data, noise, brownian_for(cfg, i), scheme);
    std::vector<double> obs(kObs * pairs.size(), 0.0);
    std::vector<double> gn, fn, gm, fm;
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const Trajectory& un = runs[slot(pairs[q].n)];
      const Trajectory& um = runs[slot(pairs[q].m)];
      obs[kObs * q] = l1_distance(un.final_state(), um.final_state());
      obs[kObs * q + 1] = l1_distance(un.states[0], um.states[0]);
      if (pairs[q].n == pairs[q].m) continue;
      for (std::size_t j = 1; j < un.states.size(); ++j) {
        const GridFunction& a = un.states[j];
        const GridFunction& b = um.states[j];
        fluxes(a, scheme.p, scheme.eps, gn, fn);
        fluxes(b, scheme.p, scheme.eps, gm, fm);
        double gap = 0.0;
        double hz = 0.0;
        for (std::size_t e = 0; e < N; ++e) {
          const double dl = std::clamp(a.at_node(e) - b.at_node(e), -k, k);
          const double dr = std::clamp(a.at_node(e + 1) - b.at_node(e + 1), -k, k);
          gap += (fn[e] - fm[e]) * (dr - dl) / h;
          const double an = 0.5 * (a.at_node(e) + a.at_node(e + 1));
          const double am = 0.5 * (b.at_node(e) + b.at_node(e + 1));
          const double curv = H.d2(an);
          if (curv != 0.0) hz += curv * Z.value(an - am) * std::pow(std::abs(gn[e]), scheme.p);
        }
        obs[kObs * q + 2] += cfg.dt * h * gap;
        obs[kObs * q + 3] += cfg.dt * h * hz;
      }
    }
    return obs;
  });

  LevelStudy s;
  s.k = k;
  s.dt = cfg.dt;
  s.h = h;
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    LevelPairResult r;
    r.pair = pairs[q];
    r.cauchy_lhs = summarize(column(table, kObs * q), cfg.seed);
    r.cauchy_rhs = summarize(column(table, kObs * q + 1), cfg.seed).mean;
    r.monotonicity_gap = summarize(column(table, kObs * q + 2), cfg.seed);
    r.hz = summarize(column(table, kObs * q + 3), cfg.seed);
    s.pairs.push_back(r);
  }
  return s;
}

CauchyResult cauchy_initial_check(const ExperimentConfig& cfg, double n, double m) {
  const LevelPair pair{n, m};
  const auto s = level_study(cfg, std::span(&pair, 1), cfg.monotonicity_k, cfg.hz_H.build(),
                             cfg.hz_Z.build());
  return {s.pairs[0].cauchy_lhs, s.pairs[0].cauchy_rhs};
}

MCResult monotonicity_gap(const ExperimentConfig& cfg, double n, double m, double k) {
  const LevelPair pair{n, m};
  return level_study(cfg, std::span(&pair, 1), k, cfg.hz_H.build(), cfg.hz_Z.build())
      .pairs[0]
      .monotonicity_gap;
}

MCResult hz_coupling_diagnostic(const ExperimentConfig& cfg, double n, double m,
                                const PiecewiseC2& H, const PiecewiseC2& Z) {
  const LevelPair pair{n, m};
  return level_study(cfg, std::span(&pair, 1), cfg.monotonicity_k, H, Z).pairs[0].hz;
}

// ---------------------------------------------------------------------------

double heat_error(std::size_t n_cells, double length, double dt, double T,
                  const SolverOptions& solver) {
  const Grid1D grid(n_cells, length);
  const double kx = std::numbers::pi / length;
  GridFunction u = GridFunction::from_function(grid, [&](double x) { return std::sin(kx * x); });
  const auto J = static_cast<std::size_t>(std::llround(T / dt));
  Resolvent step(grid, dt, 2.0, 0.0, solver);
  for (std::size_t j = 0; j < J; ++j) u = step(u);
  const double decay = std::exp(-kx * kx * static_cast<double>(J) * dt);
  const GridFunction exact =
      GridFunction::from_function(grid, [&](double x) { return decay * std::sin(kx * x); });
  return l2_norm(u - exact) / l2_norm(exact);
}

HeatResult heat_convergence(const ExperimentConfig& cfg) {
  require_runnable(cfg);
  HeatResult r;
  r.n_cells = cfg.heat_n_cells;
  r.dt = cfg.heat_dt;
  r.fine_n_cells = 2 * cfg.heat_n_cells;
  r.fine_dt = cfg.heat_dt / 2.0;
  r.error = heat_error(r.n_cells, cfg.length, r.dt, cfg.heat_T, cfg.solver);
  r.fine_error = heat_error(r.fine_n_cells, cfg.length, r.fine_dt, cfg.heat_T, cfg.solver);
  r.ratio = r.error / r.fine_error;
  return r;
}

}  // namespace splap
