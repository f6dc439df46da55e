#include <benchmark/benchmark.h>

#include <cmath>

#include "nrt/dynamics.hpp"
#include "nrt/genfamily.hpp"
#include "nrt/observables.hpp"

using nrt::Complex;
namespace fam = nrt::family;

namespace {

nrt::ModelParams with_q(double q) {
  nrt::ModelParams p;
  p.q = q;
  return p;
}

const nrt::SolutionFamily kFree = fam::FreeQGaussian{{{1, 0}, {1, 0}, {1, 0}}};

void BM_FreeCoeffs(benchmark::State& state) {
  const auto p = with_q(2.0);
  const auto k = nrt::constants_from_initial({1.0, 0.2}, {0.3, -0.1}, {0.1, 0.0}, p.q);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nrt::free_coeffs(t, k, p));
    t += 1e-6;
  }
}
BENCHMARK(BM_FreeCoeffs);

void BM_Evaluate(benchmark::State& state) {
  const auto p = with_q(1.5);
  double x = -3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nrt::evaluate(kFree, p, 0.5, x));
    x = x > 3.0 ? -3.0 : x + 1e-3;
  }
}
BENCHMARK(BM_Evaluate);

void BM_Residual(benchmark::State& state) {
  const auto p = with_q(2.0);
  for (auto _ : state) benchmark::DoNotOptimize(nrt::nrt_residual(kFree, p, nrt::Potential::none, 0.7, 1.1));
}
BENCHMARK(BM_Residual);

void BM_IntegrateCoeffs(benchmark::State& state) {
  const auto p = with_q(2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nrt::integrate_coeffs({0.0, {1.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}}, 2.0, p, nrt::Potential::none, 1e-12));
  }
}
BENCHMARK(BM_IntegrateCoeffs);

void BM_Norm(benchmark::State& state) {
  const auto p = with_q(2.0);
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nrt::norm(kFree, p, 1.0, tol));
}
BENCHMARK(BM_Norm)->Arg(6)->Arg(10);

void BM_EvolvePde(benchmark::State& state) {
  const auto p = with_q(1.0);
  const nrt::UniformGrid grid{-15.0, 15.0, static_cast<std::size_t>(state.range(0))};
  const auto initial = nrt::sample_field(kFree, p, grid, 0.0);
  const double h = grid.spacing();
  for (auto _ : state) {
    benchmark::DoNotOptimize(nrt::evolve_pde(initial, p, nrt::Potential::none, 0.02, 0.2 * h * h, {}));
  }
}
BENCHMARK(BM_EvolvePde)->Arg(301)->Arg(601)->Unit(benchmark::kMillisecond);

void BM_UniquenessFit(benchmark::State& state) {
  const auto pair = nrt::sinh_pair();
  const auto us = nrt::linspace(-2.0, 2.0, 81);
  for (auto _ : state) benchmark::DoNotOptimize(nrt::uniqueness_residual(pair, us));
}
BENCHMARK(BM_UniquenessFit);

}  // namespace
BENCHMARK_MAIN();
