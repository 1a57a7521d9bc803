#include <benchmark/benchmark.h>

#include "qpspec/arithmetic.hpp"
#include "qpspec/cocycle.hpp"
#include "qpspec/duality.hpp"
#include "qpspec/potential.hpp"
#include "qpspec/rotation.hpp"
#include "qpspec/spectrum.hpp"

namespace {

using namespace qpspec;

void BM_CocycleProduct(benchmark::State& state) {
  const auto cocycle = Cocycle::schrodinger(make_amo(0.5), presets::golden().alpha(), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cocycle_product(cocycle, 0.1, state.range(0)).log_norm());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CocycleProduct)->Arg(1000)->Arg(100000);

void BM_ProjectiveStep(benchmark::State& state) {
  const auto cocycle = Cocycle::schrodinger(make_amo(0.5), presets::golden().alpha(), 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rotation_number(cocycle, state.range(0), 1).rho);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ProjectiveStep)->Arg(100000);

void BM_SturmCount(benchmark::State& state) {
  const auto op = truncate(make_amo(0.5), presets::golden(), 0.0, static_cast<int>(state.range(0)));
  double E = -2.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eig_count_below(op, E));
    E = E > 2.0 ? -2.0 : E + 0.001;
  }
}
BENCHMARK(BM_SturmCount)->Arg(2000)->Arg(20000);

void BM_BandInertia(benchmark::State& state) {
  // The dual of a degree-3 potential is a 7-band operator, counted by LDL^T inertia.
  const PotentialSpec v(0.5, {{-3, 0.2}, {-1, 1.0}, {1, 1.0}, {3, 0.2}});
  const auto op = dual_operator(v, presets::golden(), 0.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(eig_count_below(op, 0.1));
}
BENCHMARK(BM_BandInertia)->Arg(2000);

void BM_ContinuedFraction(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(presets::golden(static_cast<int>(state.range(0))).alpha());
}
BENCHMARK(BM_ContinuedFraction)->Arg(40)->Arg(200);

void BM_BuildFrequencyWithBeta(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(build_frequency_with_beta(0.5, 7).alpha());
}
BENCHMARK(BM_BuildFrequencyWithBeta);

}  // namespace

BENCHMARK_MAIN();
