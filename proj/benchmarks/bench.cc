#include <benchmark/benchmark.h>

#include <random>

#include "robustnet/flow.h"
#include "robustnet/instances.h"
#include "robustnet/lp.h"
#include "robustnet/singlesink.h"

namespace robustnet {
namespace {

// Dense random LP with a bounded feasible region.
LinearProgram RandomLp(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coef(0.1, 1.0);
  LinearProgram lp(ObjectiveSense::kMaximize);
  for (int j = 0; j < cols; ++j) lp.AddVariable(0.0, kInfinity, coef(rng));
  for (int i = 0; i < rows; ++i) {
    std::vector<LpTerm> terms;
    for (int j = 0; j < cols; ++j) terms.push_back({j, coef(rng)});
    lp.AddRow(std::move(terms), RowRelation::kLessEqual, 1.0 + coef(rng));
  }
  return lp;
}

void BM_DenseLp(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const LinearProgram lp = RandomLp(size, size, 7);
  for (auto _ : state) benchmark::DoNotOptimize(SolveLp(lp).objective);
}
BENCHMARK(BM_DenseLp)->Arg(20)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MprBarLp(benchmark::State& state) {
  const GapInstance g = BuildGapInstance(static_cast<int>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(SolveMprBarLp(g.network, g.k).report.cost);
}
BENCHMARK(BM_MprBarLp)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_MaxFlow(benchmark::State& state) {
  const GapInstance g = BuildGapInstance(static_cast<int>(state.range(0)), 0);
  FlowProblem problem;
  problem.network = &g.network;
  problem.sink = *g.network.sink();
  problem.capacity.assign(g.network.num_edges(), Rational(1));
  problem.supply.assign(g.network.num_nodes(), Rational(1));
  problem.supply[problem.sink] = 0;
  for (auto _ : state) benchmark::DoNotOptimize(MaxFlowMinCut(problem).value);
}
BENCHMARK(BM_MaxFlow)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EvaluatePhi(benchmark::State& state) {
  const GapInstance g = BuildGapInstance(static_cast<int>(state.range(0)), 0);
  const std::vector<double> gamma(g.network.num_edges(), 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(EvaluatePhi(g.network, g.k, gamma).value);
}
BENCHMARK(BM_EvaluatePhi)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_MprDecomposition(benchmark::State& state) {
  const GapInstance g = BuildGapInstance(static_cast<int>(state.range(0)), 0);
  MprDecompositionOptions options;
  options.tolerance = 1e-2;
  for (auto _ : state) benchmark::DoNotOptimize(SolveMprDecomposition(g.network, g.k, options).report.cost);
}
BENCHMARK(BM_MprDecomposition)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace robustnet

BENCHMARK_MAIN();
