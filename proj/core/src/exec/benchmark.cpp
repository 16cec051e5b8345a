#include "flatq/exec/benchmark.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace flatq::exec {

using nlohmann::json;

const EngineTiming *QueryBenchmark::find(Engine e) const {
    for (const auto &t : engines)
        if (t.engine == e) return &t;
    return nullptr;
}

double QueryBenchmark::speedup(Engine e, Engine relative_to) const {
    const auto *a = find(e);
    const auto *b = find(relative_to);
    if (!a || !b || b->events_per_sec <= 0.0) return std::nan("");
    return a->events_per_sec / b->events_per_sec;
}

namespace {

std::int64_t total_fills(const HistogramMap &h) {
    std::int64_t n = 0;
    for (const auto &kv : h) n += kv.second.num_fills();
    return n;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

QueryBenchmark benchmark_query(const std::string &name, const CompiledQuery &query,
                               const columnar::ColumnarDataset &dataset, const std::vector<Engine> &engines,
                               int repetitions) {
    if (repetitions < 1) throw std::invalid_argument("benchmark needs at least one repetition");
    QueryBenchmark out{name, {}, true};
    for (Engine e : engines) {
        EngineTiming t{e, e != Engine::FlatFlattened || query.flattened.flattened, 0.0, 0.0, 0, {}};
        t.num_fills = total_fills(run(query, dataset, e));  // warm-up
        for (int r = 0; r < repetitions; ++r) {
            auto start = std::chrono::steady_clock::now();
            auto hists = run(query, dataset, e);
            std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            t.samples.push_back(dt.count());
            if (total_fills(hists) != t.num_fills) out.fills_agree = false;
        }
        t.median_seconds = median(t.samples);
        t.events_per_sec = t.median_seconds > 0 ? static_cast<double>(dataset.num_entries()) / t.median_seconds : 0.0;
        if (!out.engines.empty() && out.engines.front().num_fills != t.num_fills) out.fills_agree = false;
        out.engines.push_back(std::move(t));
    }
    return out;
}

BenchmarkReport benchmark(const std::vector<CorpusQuery> &corpus, const columnar::ColumnarDataset &dataset,
                          const std::vector<Engine> &engines, int repetitions) {
    BenchmarkReport report{dataset.num_entries(), repetitions, {}};
    for (const auto &q : corpus) {
        auto compiled = compile_query(q.source, dataset.schema(), q.specs);
        report.queries.push_back(benchmark_query(q.name, compiled, dataset, engines, repetitions));
    }
    return report;
}

std::string BenchmarkReport::to_json() const {
    json qs = json::array();
    for (const auto &q : queries) {
        json es = json::array();
        for (const auto &t : q.engines) {
            double s = q.speedup(t.engine);
            es.push_back({{"engine", std::string(exec::to_string(t.engine))},
                          {"applicable", t.applicable},
                          {"median_seconds", t.median_seconds},
                          {"events_per_sec", t.events_per_sec},
                          {"speedup_vs_baseline", std::isnan(s) ? json(nullptr) : json(s)},
                          {"num_fills", t.num_fills},
                          {"samples", t.samples}});
        }
        qs.push_back({{"query", q.query}, {"fills_agree", q.fills_agree}, {"engines", es}});
    }
    return json{{"num_events", num_events}, {"repetitions", repetitions}, {"queries", qs}}.dump(2);
}

std::string BenchmarkReport::to_table() const {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-18s %-15s %14s %9s %12s\n", "query", "engine", "events/s", "speedup", "fills");
    out += line;
    for (const auto &q : queries) {
        for (const auto &t : q.engines) {
            double s = q.speedup(t.engine);
            std::snprintf(line, sizeof line, "%-18s %-15s %14.0f %8.2fx %12lld%s\n", q.query.c_str(),
                          std::string(exec::to_string(t.engine)).c_str(), t.events_per_sec, std::isnan(s) ? 0.0 : s,
                          static_cast<long long>(t.num_fills), t.applicable ? "" : "  (no flattenable nest)");
            out += line;
        }
        if (!q.fills_agree) out += "  ! fill counts differ between engines\n";
    }
    return out;
}

std::string BenchmarkReport::to_csv() const {
    std::string out = "query,engine,applicable,median_seconds,events_per_sec,speedup_vs_baseline,num_fills\n";
    char line[256];
    for (const auto &q : queries)
        for (const auto &t : q.engines) {
            std::snprintf(line, sizeof line, "%s,%s,%d,%.9g,%.6g,%.6g,%lld\n", q.query.c_str(),
                          std::string(exec::to_string(t.engine)).c_str(), t.applicable ? 1 : 0, t.median_seconds,
                          t.events_per_sec, q.speedup(t.engine), static_cast<long long>(t.num_fills));
            out += line;
        }
    return out;
}

}  // namespace flatq::exec
