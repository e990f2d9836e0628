#include "stelar/epi.hpp"

#include "stelar/error.hpp"

namespace stelar {

namespace {

void check_horizon(int horizon) {
  if (horizon < 1) throw UsageError("simulation horizon must be >= 1");
}

}  // namespace

double EpiTrajectory::total_at(std::size_t t) const {
  double total = susceptible[t] + infected[t] + recovered[t];
  if (!exposed.empty()) total += exposed[t];
  return total;
}

EpiTrajectory sir_simulate(const SirConfig& cfg) {
  check_horizon(cfg.horizon);
  const std::size_t steps = static_cast<std::size_t>(cfg.horizon);

  EpiTrajectory tr;
  tr.susceptible.resize(steps + 1);
  tr.infected.resize(steps + 1);
  tr.recovered.resize(steps + 1);
  tr.new_infections.resize(steps);

  tr.susceptible[0] = cfg.s0;
  tr.infected[0] = cfg.i0;
  tr.recovered[0] = 0.0;

  for (std::size_t t = 1; t <= steps; ++t) {
    const double s = tr.susceptible[t - 1];
    const double i = tr.infected[t - 1];
    const double fresh = cfg.beta * s * i;
    tr.susceptible[t] = s - fresh;
    tr.infected[t] = i + fresh - cfg.gamma * i;
    tr.recovered[t] = tr.recovered[t - 1] + cfg.gamma * i;
    tr.new_infections[t - 1] = fresh;
  }
  return tr;
}

EpiTrajectory seir_simulate(const SeirConfig& cfg) {
  check_horizon(cfg.horizon);
  const std::size_t steps = static_cast<std::size_t>(cfg.horizon);

  EpiTrajectory tr;
  tr.susceptible.resize(steps + 1);
  tr.exposed.resize(steps + 1);
  tr.infected.resize(steps + 1);
  tr.recovered.resize(steps + 1);
  tr.new_infections.resize(steps);

  tr.susceptible[0] = cfg.s0;
  tr.exposed[0] = cfg.e0;
  tr.infected[0] = cfg.i0;
  tr.recovered[0] = 0.0;

  for (std::size_t t = 1; t <= steps; ++t) {
    const double s = tr.susceptible[t - 1];
    const double e = tr.exposed[t - 1];
    const double i = tr.infected[t - 1];
    const double fresh = cfg.beta * s * i;
    const double onset = cfg.sigma * e;
    tr.susceptible[t] = s - fresh;
    tr.exposed[t] = e + fresh - onset;
    tr.infected[t] = i + onset - cfg.gamma * i;
    tr.recovered[t] = tr.recovered[t - 1] + cfg.gamma * i;
    tr.new_infections[t - 1] = fresh;
  }
  return tr;
}

std::vector<double> new_infections_curve(const SirConfig& cfg) {
  return sir_simulate(cfg).new_infections;
}

}  // namespace stelar
