#include <benchmark/benchmark.h>

#include <memory>

#include "infground/geometry.hpp"
#include "infground/grid.hpp"
#include "infground/inf.hpp"
#include "infground/plap.hpp"

using namespace infground;

namespace {

std::shared_ptr<const GridDomain> dumbbell_grid(double h) {
  return std::make_shared<const GridDomain>(rasterize(make_dumbbell(0.1, 0.0), {.h = h}));
}

void BM_Rasterize(benchmark::State& state) {
  const double h = 1.0 / static_cast<double>(state.range(0));
  const DomainSpec spec = make_dumbbell(0.1, 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(rasterize(spec, {.h = h}));
}
BENCHMARK(BM_Rasterize)->Arg(20)->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_Quotient(benchmark::State& state) {
  const auto grid = dumbbell_grid(0.025);
  const double p = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rayleigh_quotient(grid->dist(), *grid, p));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid->size()));
}
BENCHMARK(BM_Quotient)->Arg(2)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_QuotientGradient(benchmark::State& state) {
  const auto grid = dumbbell_grid(0.025);
  for (auto _ : state) benchmark::DoNotOptimize(quotient_gradient(grid->dist(), *grid, 16.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid->size()));
}
BENCHMARK(BM_QuotientGradient)->Unit(benchmark::kMicrosecond);

void BM_InfSweep(benchmark::State& state) {
  const auto grid = dumbbell_grid(0.0125);
  InfProblem problem{.grid = grid, .pins = make_pins(*grid, PinStrategy::FullRidge),
                     .threads = static_cast<unsigned>(state.range(0))};
  const ScalarField seed = make_inf_seed(*grid, SeedStrategy::Distance, problem_lambda(problem), problem.pins);
  for (auto _ : state) benchmark::DoNotOptimize(inf_update(seed, problem));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(grid->inside_count()));
}
BENCHMARK(BM_InfSweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SolveInfBall(benchmark::State& state) {
  const auto grid = std::make_shared<const GridDomain>(rasterize(make_ball_domain({0, 0}, 1.0), {.h = 1.0 / 64}));
  const InfProblem problem{.grid = grid, .pins = make_pins(*grid, PinStrategy::FullRidge)};
  for (auto _ : state) benchmark::DoNotOptimize(solve_inf(problem));
}
BENCHMARK(BM_SolveInfBall)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
