#pragma once

#include "flatq/exec/corpus.hpp"
#include "flatq/exec/engine.hpp"

#include <string>
#include <vector>

namespace flatq::exec {

struct EngineTiming {
    Engine engine;
    /// False for the flattened engine when the query has no flattenable nest.
    bool applicable = true;
    double median_seconds = 0.0;
    double events_per_sec = 0.0;
    std::int64_t num_fills = 0;
    std::vector<double> samples;  // seconds, warm-up excluded
};

struct QueryBenchmark {
    std::string query;
    std::vector<EngineTiming> engines;
    /// Every engine produced the same total number of fills.
    bool fills_agree = true;

    const EngineTiming *find(Engine e) const;
    /// events/sec of `e` over events/sec of `relative_to`; NaN if either is missing.
    double speedup(Engine e, Engine relative_to = Engine::Baseline) const;
};

struct BenchmarkReport {
    std::int64_t num_events = 0;
    int repetitions = 0;
    std::vector<QueryBenchmark> queries;

    std::string to_json() const;
    /// Aligned columns: query, engine, events/s, speedup, fills.
    std::string to_table() const;
    std::string to_csv() const;
};

/// One warm-up run, then the median of `repetitions` timed single-threaded runs.
QueryBenchmark benchmark_query(const std::string &name, const CompiledQuery &query,
                               const columnar::ColumnarDataset &dataset, const std::vector<Engine> &engines,
                               int repetitions);

BenchmarkReport benchmark(const std::vector<CorpusQuery> &corpus, const columnar::ColumnarDataset &dataset,
                          const std::vector<Engine> &engines, int repetitions);

}  // namespace flatq::exec
