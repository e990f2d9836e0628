#pragma once

#include <vector>

namespace stelar {

/// Discrete-time SIR parameters in population-normalized form: the total
/// population is absorbed into `beta`, so compartments are fractions.
struct SirConfig {
  double s0 = 0.0;     ///< susceptible at t = 0
  double i0 = 0.0;     ///< infected at t = 0
  double beta = 0.0;   ///< contact rate
  double gamma = 0.0;  ///< recovery rate
  int horizon = 1;     ///< number of steps to simulate
};

struct SeirConfig {
  double s0 = 0.0;
  double e0 = 0.0;     ///< exposed at t = 0
  double i0 = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;  ///< exposed -> infectious rate
  int horizon = 1;
};

/// Compartment paths for t = 0..horizon (length horizon + 1) plus the
/// new-infections series: new_infections[j] is the count generated at step
/// j + 1 from the state at step j. `exposed` is empty for plain SIR runs.
struct EpiTrajectory {
  std::vector<double> susceptible;
  std::vector<double> infected;
  std::vector<double> recovered;
  std::vector<double> exposed;
  std::vector<double> new_infections;

  double total_at(std::size_t t) const;
};

/// S(t) = S(t-1) - b*S(t-1)*I(t-1)
/// I(t) = I(t-1) + b*S(t-1)*I(t-1) - g*I(t-1)
/// R(t) = R(t-1) + g*I(t-1), R(0) = 0
///
/// No clamping: out-of-range parameters propagate as-is so that the
/// parameter-fitting derivatives stay exact.
EpiTrajectory sir_simulate(const SirConfig& cfg);

/// SIR with an exposed pool: infections enter E, which drains into I at
/// rate sigma.
EpiTrajectory seir_simulate(const SeirConfig& cfg);

/// The new-infections component of sir_simulate, b*S(t-1)*I(t-1) for
/// t = 1..horizon.
std::vector<double> new_infections_curve(const SirConfig& cfg);

}  // namespace stelar
