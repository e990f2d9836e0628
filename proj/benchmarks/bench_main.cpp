// Microbenchmarks at roughly the scale of a US-county weekly feed: 133
// locations, 15 signals, 95 days, 30 components.
#include <benchmark/benchmark.h>

#include <random>

#include "stelar/admm.hpp"
#include "stelar/engine.hpp"
#include "stelar/sir_fit.hpp"
#include "stelar/tensor.hpp"

namespace {

using namespace stelar;

constexpr Index kM = 133, kN = 15, kL = 95, kK = 30;

DenseTensor3 bench_tensor() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DenseTensor3 t(kM, kN, kL);
  for (auto& v : t.data()) v = unit(rng);
  return t;
}

Matrix bench_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = unit(rng);
  return m;
}

void BM_khatri_rao(benchmark::State& state) {
  const Matrix p = bench_matrix(kL, kK, 2);
  const Matrix q = bench_matrix(kN, kK, 3);
  for (auto _ : state) benchmark::DoNotOptimize(khatri_rao(p, q));
}
BENCHMARK(BM_khatri_rao);

void BM_mttkrp_mode1(benchmark::State& state) {
  const DenseTensor3 t = bench_tensor();
  const Matrix c = bench_matrix(kL, kK, 2);
  const Matrix b = bench_matrix(kN, kK, 3);
  for (auto _ : state) benchmark::DoNotOptimize(mttkrp(t, c, b, 1));
}
BENCHMARK(BM_mttkrp_mode1);

void BM_mttkrp_mode3(benchmark::State& state) {
  const DenseTensor3 t = bench_tensor();
  const Matrix b = bench_matrix(kN, kK, 3);
  const Matrix a = bench_matrix(kM, kK, 4);
  for (auto _ : state) benchmark::DoNotOptimize(mttkrp(t, b, a, 3));
}
BENCHMARK(BM_mttkrp_mode3);

void BM_reconstruct(benchmark::State& state) {
  const FactorModel model{bench_matrix(kM, kK, 4), bench_matrix(kN, kK, 5),
                          bench_matrix(kL, kK, 6), {}};
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(model));
}
BENCHMARK(BM_reconstruct);

void BM_admm_factor_update(benchmark::State& state) {
  const Matrix phi = bench_matrix(kN * kL, kK, 7);
  const Matrix x = bench_matrix(kN * kL, kM, 8);
  FactorSubproblem sub;
  sub.gram = phi.transpose() * phi;
  sub.rhs = x.transpose() * phi;
  sub.mu = 1e-3;
  const AdmmState initial =
      AdmmState::zero_started(Matrix::Zero(kM, kK), penalty_policy(sub.gram));
  for (auto _ : state) {
    AdmmState st = initial;
    benchmark::DoNotOptimize(st = admm_factor_update(std::move(st), sub, 10));
  }
}
BENCHMARK(BM_admm_factor_update);

void BM_build_template(benchmark::State& state) {
  std::mt19937_64 rng(9);
  const SirParams params = default_sir_start(kK, rng);
  for (auto _ : state) benchmark::DoNotOptimize(build_template(params, kL));
}
BENCHMARK(BM_build_template);

void BM_sir_gradients(benchmark::State& state) {
  std::mt19937_64 rng(10);
  const SirParams params = default_sir_start(kK, rng);
  const Matrix c = bench_matrix(kL, kK, 11) * 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(sir_gradients(params, c, 1.0));
}
BENCHMARK(BM_sir_gradients);

}  // namespace

BENCHMARK_MAIN();
