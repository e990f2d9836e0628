#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "stelar/epi.hpp"
#include "stelar/error.hpp"

using namespace stelar;

TEST_CASE("no initial infections means nothing ever happens") {
  SirConfig cfg{0.8, 0.0, 0.5, 0.2, 20};
  const EpiTrajectory tr = sir_simulate(cfg);
  for (std::size_t t = 0; t <= 20; ++t) {
    CHECK(tr.susceptible[t] == 0.8);
    CHECK(tr.infected[t] == 0.0);
  }
  for (double c : tr.new_infections) CHECK(c == 0.0);
}

TEST_CASE("one hand-computed step of the reference epidemic") {
  SirConfig cfg{0.95, 0.05, 0.4, 0.1, 1};
  const EpiTrajectory tr = sir_simulate(cfg);
  CHECK(tr.new_infections[0] == doctest::Approx(0.019).epsilon(1e-12));
  CHECK(tr.susceptible[1] == doctest::Approx(0.931).epsilon(1e-12));
  CHECK(tr.infected[1] == doctest::Approx(0.064).epsilon(1e-12));
  CHECK(tr.recovered[1] == doctest::Approx(0.005).epsilon(1e-12));
}

TEST_CASE("beta = 0 reduces infections to geometric decay") {
  SirConfig cfg{0.9, 0.1, 0.0, 0.25, 30};
  const EpiTrajectory tr = sir_simulate(cfg);
  for (std::size_t t = 0; t <= 30; ++t)
    CHECK(tr.infected[t] ==
          doctest::Approx(0.1 * std::pow(0.75, static_cast<double>(t))).epsilon(1e-12));
  for (double c : tr.new_infections) CHECK(c == 0.0);
}

TEST_CASE("seir with empty exposed and infected pools stays constant") {
  SeirConfig cfg;
  cfg.s0 = 0.7;
  cfg.beta = 0.5;
  cfg.gamma = 0.2;
  cfg.sigma = 0.3;
  cfg.horizon = 15;
  const EpiTrajectory tr = seir_simulate(cfg);
  for (std::size_t t = 0; t <= 15; ++t) {
    CHECK(tr.susceptible[t] == 0.7);
    CHECK(tr.exposed[t] == 0.0);
    CHECK(tr.infected[t] == 0.0);
    CHECK(tr.recovered[t] == 0.0);
  }
}

TEST_CASE("sigma = 1 drains the whole exposed pool in one step") {
  SeirConfig cfg;
  cfg.s0 = 0.9;
  cfg.e0 = 0.1;
  cfg.i0 = 0.0;
  cfg.beta = 0.4;
  cfg.gamma = 0.1;
  cfg.sigma = 1.0;
  cfg.horizon = 1;
  const EpiTrajectory tr = seir_simulate(cfg);
  CHECK(tr.infected[1] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(tr.exposed[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("sigma = 0 never drains the exposed pool") {
  SeirConfig cfg;
  cfg.s0 = 0.8;
  cfg.e0 = 0.15;
  cfg.i0 = 0.05;
  cfg.beta = 0.0;
  cfg.gamma = 0.3;
  cfg.sigma = 0.0;
  cfg.horizon = 25;
  const EpiTrajectory tr = seir_simulate(cfg);
  for (std::size_t t = 0; t <= 25; ++t) {
    CHECK(tr.exposed[t] == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(tr.infected[t] ==
          doctest::Approx(0.05 * std::pow(0.7, static_cast<double>(t))).epsilon(1e-12));
  }
}

TEST_CASE("population is conserved over long horizons") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    double s = unit(rng), i = unit(rng);
    const double total = s + i;
    if (total > 1.0) {
      s /= total;
      i /= total;
    }
    SirConfig cfg{s, i, unit(rng), unit(rng), 500};
    const EpiTrajectory tr = sir_simulate(cfg);
    const double t0 = tr.total_at(0);
    for (std::size_t t = 1; t <= 500; ++t) CHECK(std::abs(tr.total_at(t) - t0) < 1e-10);

    SeirConfig scfg;
    scfg.s0 = s * 0.9;
    scfg.e0 = s * 0.1;
    scfg.i0 = i;
    scfg.beta = unit(rng);
    scfg.gamma = unit(rng);
    scfg.sigma = unit(rng);
    scfg.horizon = 500;
    const EpiTrajectory str = seir_simulate(scfg);
    const double st0 = str.total_at(0);
    for (std::size_t t = 1; t <= 500; ++t) CHECK(std::abs(str.total_at(t) - st0) < 1e-10);
  }
}

TEST_CASE("susceptible never rises and recovered never falls in the stable box") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    double s = unit(rng), i = unit(rng);
    const double total = s + i;
    if (total > 1.0) {
      s /= total;
      i /= total;
    }
    SirConfig cfg{s, i, unit(rng), unit(rng), 200};
    const EpiTrajectory tr = sir_simulate(cfg);
    for (std::size_t t = 1; t <= 200; ++t) {
      CHECK(tr.susceptible[t] <= tr.susceptible[t - 1] + 1e-15);
      CHECK(tr.recovered[t] >= tr.recovered[t - 1] - 1e-15);
      CHECK(tr.new_infections[t - 1] >= 0.0);
    }
  }
}

TEST_CASE("new_infections_curve is the C component of the simulation") {
  SirConfig cfg{0.95, 0.05, 0.4, 0.1, 40};
  const auto curve = new_infections_curve(cfg);
  const EpiTrajectory tr = sir_simulate(cfg);
  REQUIRE(curve.size() == 40);
  for (std::size_t t = 0; t < 40; ++t) CHECK(curve[t] == tr.new_infections[t]);
}

TEST_CASE("a horizon below one step is rejected") {
  SirConfig cfg{0.9, 0.1, 0.3, 0.1, 0};
  CHECK_THROWS_AS(sir_simulate(cfg), UsageError);
}
