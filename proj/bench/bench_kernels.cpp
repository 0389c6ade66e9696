// Parallel kernels against their serial references. Thread count follows
// OMP_NUM_THREADS; run with several values to see the scaling.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <vector>

#include "rlad/hp_series.hpp"
#include "rlad/master.hpp"
#include "rlad/netsim.hpp"

namespace {

using namespace rlad;

// z = (t/gamma)^beta for t = 250, beta = 0.7
const double kZ = std::pow(250.0, 0.7);

void BM_PmfBlock(benchmark::State& state)
{
    const auto count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(hp::pmf_block(0.7, kZ, 0, count));
    state.counters["threads"] = omp_get_max_threads();
}

void BM_PmfBlockSerial(benchmark::State& state)
{
    const auto count = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(hp::pmf_block_serial(0.7, kZ, 0, count));
}

SimConfig sim_config()
{
    SimConfig cfg;
    cfg.chain = ChainParams(20, 0.0);
    cfg.law = MlParams(0.7, 1.0);
    cfg.horizon = 250.0;
    cfg.replicates = 500;
    cfg.seed = 1;
    return cfg;
}

void BM_Ensemble(benchmark::State& state)
{
    const SimConfig cfg = sim_config();
    for (auto _ : state) benchmark::DoNotOptimize(ensemble(cfg, {250.0}));
    state.counters["threads"] = omp_get_max_threads();
}

void BM_EnsembleSerial(benchmark::State& state)
{
    const SimConfig cfg = sim_config();
    for (auto _ : state) benchmark::DoNotOptimize(ensemble_serial(cfg, {250.0}));
}

std::vector<double> solve_times()
{
    std::vector<double> t;
    for (int k = 1; k <= 16; ++k) t.push_back(15.0 * k);
    return t;
}

void BM_TransientPmf(benchmark::State& state)
{
    const ChainParams p(20, 0.0);
    const SemiMarkovSpec spec{build_q(p), CountingProcess::mittag_leffler(MlParams(0.7))};
    const auto times = solve_times();
    for (auto _ : state) benchmark::DoNotOptimize(transient_pmf(spec, 190, times));
    state.counters["threads"] = omp_get_max_threads();
}

void BM_TransientPmfSerial(benchmark::State& state)
{
    const ChainParams p(20, 0.0);
    const SemiMarkovSpec spec{build_q(p), CountingProcess::mittag_leffler(MlParams(0.7))};
    const auto times = solve_times();
    for (auto _ : state) benchmark::DoNotOptimize(transient_pmf_serial(spec, 190, times));
}

}  // namespace

BENCHMARK(BM_PmfBlock)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PmfBlockSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Ensemble)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TransientPmf)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TransientPmfSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
