#include "flatq/columnar/generator.hpp"
#include "flatq/columnar/io.hpp"
#include "flatq/compile/flat_program.hpp"
#include "flatq/exec/benchmark.hpp"
#include "flatq/exec/corpus.hpp"
#include "flatq/exec/repl.hpp"
#include "flatq/lang/diagnostic.hpp"
#include "flatq/lang/parser.hpp"
#include "flatq/sched/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace flatq;

namespace {

enum Exit : int { kOk = 0, kUsage = 2, kQuery = 3, kData = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A query diagnostic that already carries its rendered text.
struct RenderedQueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) throw UsageError("cannot write '" + path + "'");
}

struct DataSource {
    std::string dir;
    std::int64_t events = -1;
    std::uint64_t seed = 1;

    void add_options(CLI::App *cmd) {
        cmd->add_option("--data", dir, "Dataset directory written by `flatq generate`");
        cmd->add_option("--events", events, "Generate this many events in memory instead of reading --data")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", seed, "Generator seed for --events");
    }

    bool given() const { return !dir.empty() || events >= 0; }

    std::shared_ptr<const columnar::ColumnarDataset> load() const {
        if (!dir.empty() && events >= 0) throw UsageError("give either --data or --events, not both");
        if (events >= 0) return std::make_shared<const columnar::ColumnarDataset>(columnar::generate_events(events, seed));
        if (dir.empty()) throw UsageError("--data or --events is required");
        try {
            return std::make_shared<const columnar::ColumnarDataset>(columnar::read_dataset(dir));
        } catch (const columnar::IoError &e) {
            throw DataError(std::string(columnar::to_string(e.kind)) + ": " + e.what());
        } catch (const columnar::ValidationError &e) {
            throw DataError(e.what());
        }
    }
};

std::string short_hash(const std::string &h) { return h.substr(0, 16); }

// ---- generate ----

struct GenerateCmd {
    std::int64_t events = 0;
    std::uint64_t seed = 1;
    std::string out;

    void attach(CLI::App &app) {
        auto *cmd = app.add_subcommand("generate", "Write a synthetic event dataset");
        cmd->add_option("--events", events, "Number of events")->required()->check(CLI::NonNegativeNumber);
        cmd->add_option("--seed", seed, "Generator seed");
        cmd->add_option("--out", out, "Output directory")->required();
        cmd->callback([this] { run(); });
    }

    void run() const {
        auto ds = columnar::generate_events(events, seed);
        auto manifest = columnar::write_dataset(ds, out);
        std::printf("wrote %lld events to %s\n", static_cast<long long>(manifest.num_entries), out.c_str());
        for (const auto &a : manifest.arrays)
            std::printf("  %-12s %-9s %-7s %10lld  %s\n", a.path.c_str(),
                        a.role == columnar::ArrayRole::Offsets ? "offsets" : "attribute",
                        std::string(columnar::to_string(a.dtype)).c_str(), static_cast<long long>(a.length),
                        short_hash(a.sha256).c_str());
    }
};

// ---- inspect ----

struct InspectCmd {
    DataSource data;

    void attach(CLI::App &app) {
        auto *cmd = app.add_subcommand("inspect", "Print a dataset's schema, arrays and validation status");
        data.add_options(cmd);
        cmd->callback([this] { run(); });
    }

    void run() const {
        auto ds = data.load();
        std::printf("entries: %lld\nbytes: %lld\nschema: %s\n", static_cast<long long>(ds->num_entries()),
                    static_cast<long long>(ds->byte_size()), columnar::schema_to_json(ds->schema()).c_str());
        for (const auto &info : columnar::array_layout(ds->schema())) {
            std::size_t n = info.role == columnar::ArrayRole::Offsets ? ds->offsets(info.path).size()
                                                                      : columnar::column_size(ds->attribute(info.path));
            std::printf("  %-12s %-9s %10zu\n", info.path.c_str(),
                        info.role == columnar::ArrayRole::Offsets ? "offsets" : "attribute", n);
        }
        auto violations = columnar::validate(*ds);
        if (violations.empty()) {
            std::printf("valid\n");
            return;
        }
        std::string msg;
        for (const auto &v : violations) msg += "  " + v.path + "[" + std::to_string(v.index) + "] " + v.rule + ": " + v.message + "\n";
        throw DataError("dataset is invalid:\n" + msg);
    }
};

// ---- query ----

struct LoadedQuery {
    std::string origin;
    std::string source;
    std::vector<exec::HistogramSpec> specs;
};

LoadedQuery load_query(const std::string &path, const std::vector<std::string> &hist_flags) {
    LoadedQuery q{path, read_text(path), {}};
    if (fs::path(path).extension() == ".json") {
        try {
            q.source = lang::print_ast(lang::ast_from_json(q.source));
        } catch (const std::exception &e) {
            throw UsageError("bad AST JSON in '" + path + "': " + e.what());
        }
    } else {
        q.specs = exec::parse_hist_directives(q.source);
    }
    if (!hist_flags.empty()) {
        q.specs.clear();
        for (const auto &h : hist_flags) q.specs.push_back(exec::HistogramSpec::parse(h));
    }
    if (q.specs.empty()) throw UsageError("no histograms declared; add `# hist:` lines or --hist name:bins:lo:hi");
    return q;
}

exec::CompiledQuery compile_or_render(const LoadedQuery &q, const columnar::Schema &schema) {
    try {
        return exec::compile_query(q.source, schema, q.specs);
    } catch (const lang::QueryError &e) {
        throw RenderedQueryError(lang::render(e.diagnostic(), q.source, q.origin));
    }
}

struct QueryCmd {
    DataSource data;
    std::string query_file;
    std::string engine_name = "flat";
    std::vector<std::string> hists;
    bool emit_ir = false;
    bool flattened = false;
    bool emit_ast = false;

    void attach(CLI::App &app) {
        auto *cmd = app.add_subcommand("query", "Run a query and print its histograms as JSON");
        data.add_options(cmd);
        cmd->add_option("--query", query_file, "Query file (.q source or .json AST)")->required();
        cmd->add_option("--engine", engine_name, "baseline, flat or flat-flattened");
        cmd->add_option("--hist", hists, "Histogram spec name:bins:lo:hi (overrides `# hist:` lines)");
        cmd->add_flag("--emit-ir", emit_ir, "Print the lowered program instead of running");
        cmd->add_flag("--flattened", flattened, "With --emit-ir, print the flattened program");
        cmd->add_flag("--emit-ast", emit_ast, "Print the AST as JSON instead of running");
        cmd->callback([this] { run(); });
    }

    void run() const {
        auto engine = exec::engine_from_name(engine_name);
        if (!engine) throw UsageError("unknown engine '" + engine_name + "'");
        auto q = load_query(query_file, hists);
        if (emit_ast) {
            try {
                std::cout << lang::ast_to_json(lang::parse(q.source), true) << "\n";
            } catch (const lang::QueryError &e) {
                throw RenderedQueryError(lang::render(e.diagnostic(), q.source, q.origin));
            }
            return;
        }
        // IR only needs a schema; without a dataset, use the generator's.
        if (emit_ir && !data.given()) {
            auto compiled = compile_or_render(q, columnar::generate_events(0, 0).schema());
            std::cout << compile::print_ir(flattened ? compiled.flattened : compiled.flat);
            return;
        }
        auto ds = data.load();
        auto compiled = compile_or_render(q, ds->schema());
        if (emit_ir) {
            std::cout << compile::print_ir(flattened ? compiled.flattened : compiled.flat);
            return;
        }
        std::cout << exec::histograms_to_json(exec::run(compiled, *ds, *engine)) << "\n";
    }
};

// ---- bench ----

struct BenchCmd {
    DataSource data;
    std::string corpus_dir = FLATQ_DEFAULT_CORPUS;
    int reps = 5;
    std::vector<std::string> engines{"baseline", "flat", "flat-flattened"};
    std::string json_out;
    std::string csv_out;

    void attach(CLI::App &app) {
        auto *cmd = app.add_subcommand("bench", "Time every corpus query under each engine");
        data.add_options(cmd);
        cmd->add_option("--corpus", corpus_dir, "Directory of .q files");
        cmd->add_option("--reps", reps, "Timed repetitions per engine (median reported)")->check(CLI::PositiveNumber);
        cmd->add_option("--engines", engines, "Engines to run");
        cmd->add_option("--json", json_out, "Write the JSON report here");
        cmd->add_option("--csv", csv_out, "Write per-query CSV here");
        cmd->callback([this] { run(); });
    }

    void run() const {
        std::vector<exec::Engine> es;
        for (const auto &name : engines) {
            auto e = exec::engine_from_name(name);
            if (!e) throw UsageError("unknown engine '" + name + "'");
            es.push_back(*e);
        }
        auto corpus = exec::load_corpus(corpus_dir);
        if (corpus.empty()) throw UsageError("no .q files in '" + corpus_dir + "'");
        auto ds = data.load();
        exec::BenchmarkReport report;
        try {
            report = exec::benchmark(corpus, *ds, es, reps);
        } catch (const lang::QueryError &e) {
            throw RenderedQueryError(std::string("corpus query: ") + e.what());
        }
        std::cout << report.to_table();
        if (!json_out.empty()) write_text(json_out, report.to_json() + "\n");
        if (!csv_out.empty()) write_text(csv_out, report.to_csv());
    }
};

// ---- simulate ----

struct SimulateCmd {
    CLI::App *cmd = nullptr;
    int workers = 0;
    double cache_mb = 0;
    std::string policy;
    std::string payload;
    std::uint64_t seed = 1;
    std::string config_file;
    std::string workload_file;
    std::string corpus_dir = FLATQ_DEFAULT_CORPUS;
    std::string metrics_out = "-";
    std::string timeseries_out;
    bool compare = false;

    void attach(CLI::App &app) {
        cmd = app.add_subcommand("simulate", "Run the cluster scheduler on a virtual clock");
        cmd->add_option("--workers", workers, "Worker count")->check(CLI::PositiveNumber);
        cmd->add_option("--cache-mb", cache_mb, "Per-worker cache capacity in MiB")->check(CLI::NonNegativeNumber);
        cmd->add_option("--policy", policy,
                        "two-round-pull, round-robin-push, least-busy-push or any-pull-no-affinity");
        cmd->add_option("--payload", payload, "real or delay");
        cmd->add_option("--seed", seed, "Simulation seed");
        cmd->add_option("--config", config_file, "Cluster config JSON");
        cmd->add_option("--workload", workload_file, "Workload JSON (default: 20 sequential max_pt queries)");
        cmd->add_option("--corpus", corpus_dir, "Directory of .q files named by the workload");
        cmd->add_option("--metrics", metrics_out, "Metrics JSON output (- for stdout)");
        cmd->add_option("--timeseries", timeseries_out, "CSV time series output");
        cmd->add_flag("--compare", compare,
                      "Run every policy and print a hit-rate table; --metrics then gets a JSON array of runs")
            ->excludes("--timeseries");
        cmd->callback([this] { run(); });
    }

    sched::ClusterConfig config() const {
        sched::ClusterConfig cfg;
        if (!config_file.empty()) cfg = sched::config_from_json(read_text(config_file), cfg);
        if (cmd->count("--workers")) cfg.workers = workers;
        if (cmd->count("--cache-mb")) cfg.cache_bytes = static_cast<std::int64_t>(cache_mb * 1024 * 1024);
        if (!policy.empty()) {
            auto p = sched::policy_from_name(policy);
            if (!p) throw UsageError("unknown policy '" + policy + "'");
            cfg.policy = *p;
        }
        if (!payload.empty()) {
            auto p = sched::payload_from_name(payload);
            if (!p) throw UsageError("unknown payload '" + payload + "'");
            cfg.payload = *p;
        }
        cfg.validate();
        return cfg;
    }

    static constexpr const char *kDefaultWorkload = R"({
  "sequential": true,
  "datasets": [{"id": "dy", "events": 20000, "seed": 1, "partitions": 10}],
  "queries": [{"query": "max_pt", "dataset": "dy", "repeat": 20}]
})";

    void run() const {
        auto cfg = config();
        auto corpus = exec::load_corpus(corpus_dir);
        auto wl = sched::workload_from_json(workload_file.empty() ? std::string(kDefaultWorkload) : read_text(workload_file),
                                            corpus);
        if (compare) {
            std::string runs = "[";
            std::printf("%-22s %9s %12s %14s\n", "policy", "hit_rate", "makespan_us", "bytes_loaded");
            for (auto p : {sched::Policy::TwoRoundPull, sched::Policy::RoundRobinPush, sched::Policy::LeastBusyPush,
                           sched::Policy::AnyPullNoAffinity}) {
                auto c = cfg;
                c.policy = p;
                auto r = sched::simulate(c, wl, seed);
                std::printf("%-22s %9.4f %12lld %14lld\n", std::string(sched::to_string(p)).c_str(), r.hit_rate(),
                            static_cast<long long>(r.makespan), static_cast<long long>(r.bytes_loaded));
                runs += (runs.size() > 1 ? ",\n" : "\n") + r.metrics_json();
            }
            if (metrics_out != "-") write_text(metrics_out, runs + "\n]\n");
            return;
        }
        auto r = sched::simulate(cfg, wl, seed);
        write_text(metrics_out, r.metrics_json() + "\n");
        if (!timeseries_out.empty()) write_text(timeseries_out, r.timeseries_csv());
    }
};

// ---- repl ----

struct ReplCmd {
    DataSource data;
    std::string engine_name = "flat";

    void attach(CLI::App &app) {
        auto *cmd = app.add_subcommand("repl", "Interactive query loop; a blank line runs the buffered query");
        data.add_options(cmd);
        cmd->add_option("--engine", engine_name, "Initial engine");
        cmd->callback([this] { run(); });
    }

    void run() const {
        auto engine = exec::engine_from_name(engine_name);
        if (!engine) throw UsageError("unknown engine '" + engine_name + "'");
        exec::ReplSession session(data.load(), *engine);
        std::cout << "flatq repl; :help for directives\n";
        std::string line;
        while (true) {
            std::cout << session.prompt() << std::flush;
            if (!std::getline(std::cin, line)) {
                // End of input runs whatever is buffered.
                if (session.pending()) std::cout << "\n" << session.feed("").text;
                std::cout << "\n";
                return;
            }
            auto reply = session.feed(line);
            std::cout << reply.text;
            if (reply.quit) return;
        }
    }
};

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"flatq: columnar event queries, flat-loop compilation and cluster simulation"};
    app.require_subcommand(1);
    GenerateCmd generate;
    InspectCmd inspect;
    QueryCmd query;
    BenchCmd bench;
    SimulateCmd simulate;
    ReplCmd repl;
    generate.attach(app);
    inspect.attach(app);
    query.attach(app);
    bench.attach(app);
    simulate.attach(app);
    repl.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    } catch (const UsageError &e) {
        std::cerr << "flatq: " << e.what() << "\n";
        return kUsage;
    } catch (const RenderedQueryError &e) {
        std::cerr << e.what();
        return kQuery;
    } catch (const lang::QueryError &e) {
        std::cerr << "flatq: " << e.what() << "\n";
        return kQuery;
    } catch (const exec::QueryRuntimeError &e) {
        std::cerr << "flatq: runtime error: " << e.what() << "\n";
        return kQuery;
    } catch (const DataError &e) {
        std::cerr << "flatq: " << e.what() << "\n";
        return kData;
    } catch (const columnar::IoError &e) {
        std::cerr << "flatq: " << columnar::to_string(e.kind) << ": " << e.what() << "\n";
        return kData;
    } catch (const exec::ProgramMismatchError &e) {
        std::cerr << "flatq: " << e.what() << "\n";
        return kData;
    } catch (const std::invalid_argument &e) {
        std::cerr << "flatq: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception &e) {
        std::cerr << "flatq: " << e.what() << "\n";
        return kData;
    }
    return kOk;
}
