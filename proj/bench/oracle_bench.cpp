// Serial reference sweep vs the OpenMP sweep on a three-atom oracle.

#include <benchmark/benchmark.h>

#include "drovar/oracle.hpp"

namespace {

using namespace drovar;

void run_oracle(benchmark::State& state, bool serial) {
  const ProblemData data({0.3, -0.5, 0.1}, {-0.2, 0.9, 0.4});
  const EmpiricalMeasure p({0.2, 0.3, 0.5});
  const FDivergenceFamily family = FDivergenceFamily::alpha(state.range(1) == 0 ? 2.0 : 0.5);
  OracleConfig cfg;
  cfg.grid_per_dim = state.range(0);
  cfg.serial = serial;
  for (auto _ : state) {
    benchmark::DoNotOptimize(primal_sup_grid(data, p, family, 0.3, cfg));
  }
  state.counters["rows"] = static_cast<double>(cfg.grid_per_dim);
}

void BM_OracleSerial(benchmark::State& state) { run_oracle(state, true); }
void BM_OracleParallel(benchmark::State& state) { run_oracle(state, false); }

}  // namespace

BENCHMARK(BM_OracleSerial)->ArgsProduct({{301, 1201}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleParallel)->ArgsProduct({{301, 1201}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
