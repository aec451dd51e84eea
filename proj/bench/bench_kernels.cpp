// Serial reference vs OpenMP path for the two hot kernels.
#include <benchmark/benchmark.h>

#include "uplift_zero/dispatch.hpp"
#include "uplift_zero/expr.hpp"
#include "uplift_zero/parallel.hpp"
#include "uplift_zero/scarf.hpp"

using namespace uplift_zero;

namespace {

ExecPolicy policy(const benchmark::State& state) {
  return state.range(0) == 0 ? ExecPolicy::Serial : ExecPolicy::Parallel;
}

// Five distinct units over three periods: 8^5 commitment profiles.
MarketInstance multi_period() {
  MarketInstance inst;
  inst.periods = 3;
  inst.demand = {12.0, 31.0, 18.0};
  for (int i = 0; i < 5; ++i)
    inst.units.push_back({"u" + std::to_string(i + 1), 1.0 + i, 10.0 + 2.0 * i, 2.0 + 1.5 * i, 10.0 * i, 0, 0, 0});
  return inst;
}

void BM_DispatchScarf(benchmark::State& state) {
  const auto inst = scarf_instance(40);
  for (auto _ : state) benchmark::DoNotOptimize(solve_centralized(inst, policy(state)).f_star);
}

void BM_DispatchMultiPeriod(benchmark::State& state) {
  const auto inst = multi_period();
  for (auto _ : state) benchmark::DoNotOptimize(solve_centralized(inst, policy(state)).f_star);
}

void BM_EvalAll(benchmark::State& state) {
  const UnitParams unit{"x", 1, 9, 4, 12, 0, 0, 0};
  const auto xs = feasible_set_samples(unit, Formulation::StatusOutput, 3, {}, 41);
  const Expr e = Expr::min({Expr::g(0) - Expr::u(1), 2.0 * Expr::g(2)}) + Expr::theta(Expr::g(1)) +
                 Expr::abs(Expr::g(0) - Expr::g(2));
  for (auto _ : state) benchmark::DoNotOptimize(eval_all(e, xs, 1e-7, policy(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(xs.size()));
}

}  // namespace

BENCHMARK(BM_DispatchScarf)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DispatchMultiPeriod)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvalAll)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);

int main(int argc, char** argv) {
  configure_threads_from_env();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
