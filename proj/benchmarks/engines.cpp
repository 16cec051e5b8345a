#include "flatq/columnar/generator.hpp"
#include "flatq/exec/corpus.hpp"
#include "flatq/exec/engine.hpp"
#include "flatq/lang/parser.hpp"
#include "flatq/sched/simulation.hpp"

#include <benchmark/benchmark.h>

using namespace flatq;

namespace {

constexpr std::int64_t kEvents = 100'000;

const columnar::ColumnarDataset &events() {
    static const auto ds = columnar::generate_events(kEvents, 1);
    return ds;
}

const std::vector<exec::CorpusQuery> &corpus() {
    static const auto c = exec::load_corpus(FLATQ_BENCH_CORPUS);
    return c;
}

void run_query(benchmark::State &state, const char *name, exec::Engine engine) {
    const auto &cq = exec::find_query(corpus(), name);
    auto q = exec::compile_query(cq.source, events().schema(), cq.specs);
    for (auto _ : state) benchmark::DoNotOptimize(exec::run(q, events(), engine));
    state.SetItemsProcessed(state.iterations() * kEvents);
}

void register_queries() {
    for (const char *name : {"max_pt", "eta_of_best", "fill_all_pt", "mass_of_pairs", "pt_sum_of_pairs"})
        for (auto engine : {exec::Engine::Baseline, exec::Engine::Flat, exec::Engine::FlatFlattened}) {
            auto label = std::string("query/") + name + "/" + std::string(exec::to_string(engine));
            benchmark::RegisterBenchmark(label.c_str(), run_query, name, engine)->Unit(benchmark::kMillisecond);
        }
}

void BM_Materialize(benchmark::State &state) {
    auto ds = columnar::generate_events(state.range(0), 2);
    for (auto _ : state) benchmark::DoNotOptimize(columnar::materialize(ds));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Materialize)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Explode(benchmark::State &state) {
    auto ds = columnar::generate_events(state.range(0), 3);
    auto value = columnar::materialize(ds);
    for (auto _ : state) benchmark::DoNotOptimize(columnar::explode(value, ds.schema()));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Explode)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_Compile(benchmark::State &state) {
    const auto &cq = exec::find_query(corpus(), "mass_of_pairs");
    for (auto _ : state) benchmark::DoNotOptimize(exec::compile_query(cq.source, columnar::event_schema(), cq.specs));
}
BENCHMARK(BM_Compile);

void BM_Simulate(benchmark::State &state) {
    const auto &cq = exec::find_query(corpus(), "max_pt");
    sched::Workload wl;
    wl.sequential = true;
    wl.datasets.push_back({"dy", std::make_shared<const columnar::ColumnarDataset>(columnar::generate_events(20'000, 4)), 10});
    for (int i = 0; i < 20; ++i) wl.queries.push_back({0, cq.name, cq.source, "dy", cq.specs, std::nullopt});
    sched::ClusterConfig cfg;
    cfg.workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(sched::simulate(cfg, wl, 1));
}
BENCHMARK(BM_Simulate)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

int main(int argc, char **argv) {
    register_queries();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
