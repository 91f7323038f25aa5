#include "splap/sde.hpp"

#include <cmath>
#include <sstream>

#include "splap/error.hpp"

namespace splap {

std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t index, StreamTag tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

double BrownianPath::terminal_value() const {
  double sum = 0.0;
  for (double d : increments) sum += d;
  return sum;
}

BrownianPath BrownianPath::coarsen(std::size_t factor) const {
  if (factor == 0 || increments.size() % factor != 0) {
    throw_invalid("coarsen: factor must divide the number of increments");
  }
  BrownianPath out{dt * static_cast<double>(factor), {}, master_seed, path_index};
  out.increments.reserve(increments.size() / factor);
  for (std::size_t j = 0; j < increments.size(); j += factor) {
    double sum = 0.0;
    for (std::size_t q = 0; q < factor; ++q) sum += increments[j + q];
    out.increments.push_back(sum);
  }
  return out;
}

BrownianPath sample_brownian(std::uint64_t master_seed, std::uint64_t path_index, std::size_t steps,
                             double dt) {
  if (steps < 1) throw_invalid("sample_brownian needs at least one step");
  require_positive(dt, "time step dt");
  auto rng = make_stream(master_seed, path_index, StreamTag::brownian);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  BrownianPath path{dt, std::vector<double>(steps), master_seed, path_index};
  for (double& d : path.increments) d = normal(rng);
  return path;
}

std::vector<Trajectory> evolve_group(const std::vector<GridFunction>& initial,
                                     const NoiseModel& noise, const BrownianPath& path,
                                     const SchemeParams& scheme) {
  if (initial.empty()) throw_invalid("evolve: no initial data");
  const Grid1D& grid = initial.front().grid();
  for (const auto& u0 : initial) {
    if (!(u0.grid() == grid)) throw_invalid("evolve: initial data live on different grids");
  }
  const std::size_t steps = path.steps();
  Resolvent solver(grid, path.dt, scheme.p, scheme.eps, scheme.solver);

  std::vector<Trajectory> out(initial.size());
  for (std::size_t q = 0; q < initial.size(); ++q) {
    out[q].path = path;
    out[q].times.resize(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) out[q].times[j] = static_cast<double>(j) * path.dt;
    out[q].states.reserve(steps + 1);
    out[q].states.push_back(initial[q]);
  }

  std::vector<double> g(grid.n_interior());
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * path.dt;
    const double db = path.increments[j];
    for (auto& traj : out) {
      const auto u = traj.states.back().values();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = u[i] + noise(t, u[i]) * db;
      std::vector<double> w(g.size());
      try {
        solver.solve(g, w);
      } catch (const SolverFailure& f) {
        std::ostringstream os;
        os << f.what() << " [time step " << j << "]";
        throw SolverFailure(os.str(), f.last_iterate(), f.residual(), static_cast<long>(j));
      }
      traj.states.emplace_back(grid, std::move(w));
    }
  }
  return out;
}

Trajectory evolve(const GridFunction& u0, const NoiseModel& noise, const BrownianPath& path,
                  const SchemeParams& scheme) {
  return std::move(evolve_group({u0}, noise, path, scheme).front());
}

std::pair<Trajectory, Trajectory> evolve_coupled(const GridFunction& u0, const GridFunction& v0,
                                                 const NoiseModel& noise, const BrownianPath& path,
                                                 const SchemeParams& scheme) {
  if (!(u0.grid() == v0.grid())) throw_invalid("evolve_coupled: data live on different grids");
  auto both = evolve_group({u0, v0}, noise, path, scheme);
  return {std::move(both[0]), std::move(both[1])};
}

double ito_integral(const Trajectory& traj,
                    const std::function<double(const GridFunction&, double)>& integrand) {
  double sum = 0.0;
  for (std::size_t j = 0; j < traj.steps(); ++j) {
    sum += integrand(traj.states[j], traj.times[j]) * traj.path.increments[j];
  }
  return sum;
}

}  // namespace splap
