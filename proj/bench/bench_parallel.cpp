// Serial vs OpenMP timings for the parallel paths: graph construction,
// the strategy comparison and multi-run predictor training.

#include <benchmark/benchmark.h>

#include <map>

#include "fuzztwin/analysis/graph.hpp"
#include "fuzztwin/analysis/synthetic.hpp"
#include "fuzztwin/engine/experiment.hpp"
#include "fuzztwin/predict/train.hpp"

using namespace fuzztwin;

namespace {

Execution exec_of(const benchmark::State& state) {
    return state.range(0) ? Execution::Parallel : Execution::Serial;
}

const std::vector<ConnectionTrace>& traces(std::size_t n) {
    static std::map<std::size_t, std::vector<ConnectionTrace>> cache;
    auto& v = cache[n];
    if (v.empty()) {
        analysis::SyntheticConfig cfg;
        cfg.traces = n;
        v = analysis::synthetic_dataset(cfg).traces;
    }
    return v;
}

void BM_BuildGraph(benchmark::State& state) {
    const auto& data = traces(static_cast<std::size_t>(state.range(1)));
    for (auto _ : state) benchmark::DoNotOptimize(analysis::build_graph(data, exec_of(state)));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_BuildGraph)->ArgNames({"parallel", "traces"})->ArgsProduct({{0, 1}, {1'000, 20'000}});

void BM_RunComparison(benchmark::State& state) {
    engine::ExperimentConfig cfg;
    cfg.seeds = 8;
    for (auto _ : state) benchmark::DoNotOptimize(engine::run_comparison(cfg, exec_of(state)));
}
BENCHMARK(BM_RunComparison)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrainRuns(benchmark::State& state) {
    const auto& data = traces(300);
    predict::TrainConfig cfg;
    cfg.runs = 4;
    cfg.epochs = 5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict::lstm_train(data, predict::Cutoff::Steps(10), cfg, exec_of(state)));
    }
}
BENCHMARK(BM_TrainRuns)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CutoffSweep(benchmark::State& state) {
    const auto& data = traces(300);
    predict::TrainConfig cfg;
    cfg.epochs = 5;
    const std::vector<predict::Cutoff> cutoffs{predict::Cutoff::Steps(2), predict::Cutoff::Steps(5),
                                               predict::Cutoff::Steps(10), predict::Cutoff::Duration(0.05)};
    for (auto _ : state) benchmark::DoNotOptimize(predict::cutoff_sweep(data, cutoffs, cfg, exec_of(state)));
}
BENCHMARK(BM_CutoffSweep)->ArgNames({"parallel"})->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
