#include "support.hpp"

#include "flatq/columnar/generator.hpp"
#include "flatq/exec/benchmark.hpp"
#include "flatq/exec/corpus.hpp"
#include "flatq/exec/engine.hpp"
#include "flatq/exec/repl.hpp"
#include "flatq/lang/diagnostic.hpp"

#include <doctest.h>
#include <json.hpp>

#include <bit>
#include <cmath>
#include <limits>

using namespace flatq;
using namespace flatq::exec;
using columnar::ListValue;
using columnar::LogicalValue;
using columnar::RecordValue;

namespace {

constexpr Engine kEngines[] = {Engine::Baseline, Engine::Flat, Engine::FlatFlattened};

struct MuonRow {
    double pt, eta, phi;
};

columnar::ColumnarDataset events_of(const std::vector<std::vector<MuonRow>> &events) {
    ListValue root;
    for (const auto &ev : events) {
        ListValue muons;
        for (const auto &m : ev)
            muons.items.push_back(RecordValue{{LogicalValue(m.pt), LogicalValue(m.eta), LogicalValue(m.phi)}});
        root.items.push_back(RecordValue{{LogicalValue(std::move(muons))}});
    }
    return columnar::explode(LogicalValue(std::move(root)), columnar::event_schema());
}

const std::vector<CorpusQuery> &corpus() {
    static const auto c = load_corpus(flatq::testing::corpus_dir());
    return c;
}

CompiledQuery compiled(const std::string &name, const columnar::Schema &schema = columnar::event_schema()) {
    const auto &q = find_query(corpus(), name);
    return compile_query(q.source, schema, q.specs);
}

std::vector<double> values(const FillTrace &trace) {
    std::vector<double> out;
    for (const auto &f : trace) out.push_back(f.value);
    return out;
}

bool bitwise_equal(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    return true;
}

Histogram random_histogram(flatq::testing::Rng &rng, const HistogramSpec &spec, int fills) {
    Histogram h(spec);
    std::normal_distribution<double> d((spec.lo + spec.hi) / 2, spec.hi - spec.lo);
    for (int i = 0; i < fills; ++i) h.fill(i % 37 == 0 ? std::nan("") : d(rng));
    return h;
}

}  // namespace

TEST_SUITE("histogram") {
    TEST_CASE("bin edges") {
        Histogram h({"h", 10, 0.0, 10.0});
        h.fill(0.0);
        h.fill(std::nextafter(10.0, 0.0));
        h.fill(10.0);
        h.fill(-1e-300);
        h.fill(std::numeric_limits<double>::infinity());
        h.fill(-std::numeric_limits<double>::infinity());
        h.fill(std::nan(""));
        h.fill(4.999999);
        h.fill(5.0);
        CHECK(h.counts()[0] == 1);
        CHECK(h.counts()[4] == 1);
        CHECK(h.counts()[5] == 1);
        CHECK(h.counts()[9] == 1);
        CHECK(h.underflow() == 2);
        CHECK(h.overflow() == 3);
        CHECK(h.num_fills() == 9);
    }

    TEST_CASE("fills are conserved") {
        flatq::testing::Rng rng(5);
        for (int trial = 0; trial < 200; ++trial) {
            HistogramSpec spec{"h", std::uniform_int_distribution<int>(1, 50)(rng), -3.0, 7.5};
            auto h = random_histogram(rng, spec, trial * 3);
            std::int64_t total = h.underflow() + h.overflow();
            for (auto c : h.counts()) total += c;
            CHECK(total == h.num_fills());
        }
    }

    TEST_CASE("merge is associative and commutative with an empty identity") {
        flatq::testing::Rng rng(6);
        HistogramSpec spec{"h", 20, 0.0, 100.0};
        for (int trial = 0; trial < 100; ++trial) {
            auto a = random_histogram(rng, spec, 50);
            auto b = random_histogram(rng, spec, 80);
            auto c = random_histogram(rng, spec, 3);
            CHECK(merge(a, b) == merge(b, a));
            CHECK(merge(merge(a, b), c) == merge(a, merge(b, c)));
            CHECK(merge(a, Histogram(spec)) == a);
        }
    }

    TEST_CASE("merge rejects different specs") {
        Histogram a({"h", 10, 0.0, 1.0});
        CHECK_THROWS_AS(a.merge(Histogram({"h", 11, 0.0, 1.0})), AggregationError);
        CHECK_THROWS_AS(a.merge(Histogram({"h", 10, 0.0, 2.0})), AggregationError);
        HistogramMap m1 = make_histograms({{"x", 1, 0, 1}});
        HistogramMap m2 = make_histograms({{"y", 1, 0, 1}});
        CHECK_THROWS_AS(merge(m1, m2), AggregationError);
    }

    TEST_CASE("spec parsing") {
        auto s = HistogramSpec::parse("maxpt:100:0:200");
        CHECK(s == HistogramSpec{"maxpt", 100, 0.0, 200.0});
        CHECK(HistogramSpec::parse(s.to_string()) == s);
        for (const char *bad : {"h:0:0:1", "h:10:1:1", "h:10:2:1", "h:10:0", "h:x:0:1", ":10:0:1", "h:10:0:inf"}) {
            CAPTURE(bad);
            CHECK_THROWS_AS(HistogramSpec::parse(bad), std::invalid_argument);
        }
        CHECK_THROWS_AS(make_histograms({{"h", 1, 0, 1}, {"h", 2, 0, 1}}), std::invalid_argument);
    }

    TEST_CASE("json round trip") {
        flatq::testing::Rng rng(7);
        HistogramMap m;
        m.emplace("b", random_histogram(rng, {"b", 7, -1.0, 1.0}, 100));
        m.emplace("a", random_histogram(rng, {"a", 3, 0.0, 0.5}, 10));
        auto text = histograms_to_json(m);
        CHECK(histograms_from_json(text) == m);
        auto j = nlohmann::json::parse(text);
        CHECK(j["histograms"][0]["name"] == "a");
        CHECK_THROWS(Histogram::from_parts({"h", 2, 0, 1}, {1, 1}, 0, 0, 3));
        CHECK_THROWS(Histogram::from_parts({"h", 2, 0, 1}, {1}, 0, 0, 1));
    }

    TEST_CASE("summary") {
        HistogramMap m = make_histograms({{"h", 4, 0, 4}});
        m.at("h").fill(1.5);
        m.at("h").fill(1.5);
        m.at("h").fill(3.5);
        auto text = summarize(m);
        CHECK(text.find("h: fills=3 mean=2.167") == 0);
        CHECK(text.find("peak=2 in [1, 2)") != std::string::npos);
        CHECK(std::isnan(Histogram({"e", 1, 0, 1}).approx_mean()));
    }
}

TEST_SUITE("engines") {
    TEST_CASE("pair fixture fills on every engine") {
        auto q = compile_query(flatq::testing::kPairNestQuery, columnar::pair_fixture_schema(),
                               {{"first", 128, 0, 128}, {"second", 8, 0, 8}});
        auto data = flatq::testing::pair_fixture_dataset();
        for (auto e : kEngines) {
            CAPTURE(to_string(e));
            FillTrace t;
            auto h = run(q, data, e, &t);
            std::vector<double> second, first;
            for (const auto &f : t) (f.hist == 1 ? second : first).push_back(f.value);
            CHECK(second == std::vector<double>{1, 2, 3, 4, 5, 6, 7});
            CHECK(first == std::vector<double>{97, 98, 99, 100, 101, 102, 103});
            CHECK(h.at("second").num_fills() == 7);
            for (int b = 1; b <= 7; ++b) CHECK(h.at("second").counts()[static_cast<std::size_t>(b)] == 1);
        }
    }

    TEST_CASE("max pt picks the largest muon and zero for empty events") {
        auto data = events_of({{{10, 0, 0}, {50, 0, 0}, {30, 0, 0}}, {}, {{7.5, 1, 1}}});
        auto q = compiled("max_pt");
        for (auto e : kEngines) {
            FillTrace t;
            run(q, data, e, &t);
            CHECK(values(t) == std::vector<double>{50.0, 0.0, 7.5});
        }
    }

    TEST_CASE("eta of best fills only events with a positive pt muon") {
        auto data = events_of({{{10, 0.1, 0}, {50, -0.7, 0}, {30, 2.0, 0}}, {}, {{3, 0.25, 1}}});
        FillTrace t;
        run(compiled("eta_of_best"), data, Engine::Flat, &t);
        CHECK(values(t) == std::vector<double>{-0.7, 0.25});
    }

    TEST_CASE("pair mass on a known pair") {
        auto data = events_of({{{50, 0.5, 0.3}, {40, -0.5, 1.3}}});
        double expected = std::sqrt(2 * 50.0 * 40.0 * (std::cosh(1.0) - std::cos(-1.0)));
        for (auto e : kEngines) {
            FillTrace t;
            run(compiled("mass_of_pairs"), data, e, &t);
            REQUIRE(t.size() == 1);
            CHECK(t[0].value == doctest::Approx(expected).epsilon(1e-12));
        }
    }

    TEST_CASE("empty dataset gives empty histograms") {
        auto data = columnar::generate_events(0, 1);
        for (const auto &cq : corpus())
            for (auto e : kEngines) {
                auto h = run(compile_query(cq.source, data.schema(), cq.specs), data, e);
                for (const auto &[name, hist] : h) CHECK(hist.num_fills() == 0);
            }
    }

    TEST_CASE("corpus queries match the straight-line oracle bit for bit") {
        auto data = columnar::generate_events(10000, 42);
        auto events = columnar::materialize(data);
        for (const auto &cq : corpus()) {
            CAPTURE(cq.name);
            auto expected = flatq::testing::oracle_fills(cq.name, events);
            auto q = compile_query(cq.source, data.schema(), cq.specs);
            std::optional<HistogramMap> first;
            for (auto e : kEngines) {
                CAPTURE(to_string(e));
                FillTrace t;
                auto h = run(q, data, e, &t);
                CHECK(bitwise_equal(values(t), expected));
                if (!first) first = h;
                CHECK(h == *first);
            }
        }
    }

    TEST_CASE("engines agree on random well-typed queries") {
        flatq::testing::Rng rng(77);
        for (int trial = 0; trial < 300; ++trial) {
            auto src = flatq::testing::random_event_query(rng);
            auto data = columnar::generate_events(std::uniform_int_distribution<int>(0, 60)(rng), rng());
            CAPTURE(src);
            auto q = compile_query(src, data.schema(), {{"h", 50, -100, 100}});
            FillTrace base, flat, flattened;
            auto hb = run(q, data, Engine::Baseline, &base);
            auto hf = run(q, data, Engine::Flat, &flat);
            auto hx = run(q, data, Engine::FlatFlattened, &flattened);
            CHECK(same_fills(base, flat));
            CHECK(same_fills(base, flattened));
            CHECK(hb == hf);
            CHECK(hb == hx);
        }
    }

    TEST_CASE("partition results merge to the whole-dataset result") {
        auto data = columnar::generate_events(3001, 9);
        for (const auto &cq : corpus()) {
            auto q = compile_query(cq.source, data.schema(), cq.specs);
            auto whole = run(q, data, Engine::Flat);
            for (int k : {1, 2, 7}) {
                CAPTURE(cq.name);
                CAPTURE(k);
                auto merged = make_histograms(cq.specs);
                for (const auto &p : columnar::make_partitions(data, "d", k))
                    merged = merge(merged, run(q, columnar::slice(data, p.begin, p.end), Engine::Flat));
                CHECK(merged == whole);
            }
        }
    }

    TEST_CASE("out of range index is a runtime error on every engine") {
        auto data = events_of({{{1, 0, 0}}});
        for (const char *idx : {"1", "-1"}) {
            auto src = std::string("for event in dataset:\n  fill_histogram(event.muons[") + idx + "].pt)\n";
            auto q = compile_query(src, data.schema(), {{"h", 1, 0, 1}});
            for (auto e : kEngines) CHECK_THROWS_AS(run(q, data, e), QueryRuntimeError);
        }
    }

    TEST_CASE("a program built for one schema refuses another dataset") {
        auto q = compiled("max_pt");
        for (auto e : kEngines) CHECK_THROWS_AS(run(q, flatq::testing::pair_fixture_dataset(), e), ProgramMismatchError);
    }

    TEST_CASE("specs supply histogram names") {
        // A one-argument fill targets the sole declared histogram, whatever it is called.
        const auto &cq = find_query(corpus(), "max_pt");
        auto q = compile_query(cq.source, columnar::event_schema(), {{"other", 1, 0, 1}});
        CHECK(run(q, columnar::generate_events(10, 1), Engine::Flat).at("other").num_fills() == 10);
        CHECK_THROWS(compile_query(cq.source, columnar::event_schema(), {}));
        CHECK_THROWS(compile_query(cq.source, columnar::event_schema(), {{"a", 1, 0, 1}, {"b", 1, 0, 1}}));
        CHECK_THROWS(compile_query(flatq::testing::kPairNestQuery, columnar::pair_fixture_schema(),
                                   {{"first", 1, 0, 1}, {"third", 1, 0, 1}}));
    }

    TEST_CASE("engine names") {
        for (auto e : kEngines) CHECK(engine_from_name(to_string(e)) == e);
        CHECK_FALSE(engine_from_name("vectorized").has_value());
    }
}

TEST_SUITE("corpus") {
    TEST_CASE("every query declares its histograms") {
        CHECK(corpus().size() == 5);
        for (const auto &q : corpus()) {
            CAPTURE(q.name);
            CHECK_FALSE(q.specs.empty());
        }
        CHECK(find_query(corpus(), "max_pt").specs[0] == HistogramSpec{"maxpt", 100, 0, 200});
        CHECK_THROWS(find_query(corpus(), "nope"));
    }

    TEST_CASE("hist directives") {
        auto specs = parse_hist_directives("# hist: a:1:0:1\nfor x in dataset:\n  # hist: b:2:0:1\n");
        REQUIRE(specs.size() == 2);
        CHECK(specs[1].name == "b");
    }
}

TEST_SUITE("benchmark") {
    TEST_CASE("report shape") {
        auto data = columnar::generate_events(2000, 1);
        auto report = benchmark(corpus(), data, {kEngines[0], kEngines[1], kEngines[2]}, 2);
        CHECK(report.num_events == 2000);
        REQUIRE(report.queries.size() == corpus().size());
        for (const auto &q : report.queries) {
            CAPTURE(q.query);
            CHECK(q.fills_agree);
            REQUIRE(q.engines.size() == 3);
            CHECK(q.find(Engine::Baseline)->samples.size() == 2);
            CHECK(q.speedup(Engine::Baseline) == doctest::Approx(1.0));
            bool flattens = q.query == "fill_all_pt";
            CHECK(q.find(Engine::FlatFlattened)->applicable == flattens);
        }
        auto j = nlohmann::json::parse(report.to_json());
        CHECK(j["queries"].size() == corpus().size());
        CHECK(report.to_csv().rfind("query,engine,", 0) == 0);
        CHECK(report.to_table().find("fill_all_pt") != std::string::npos);
    }
}

TEST_SUITE("repl") {
    auto dataset() { return std::make_shared<const columnar::ColumnarDataset>(columnar::generate_events(500, 3)); }

    TEST_CASE("a blank line runs the buffered query") {
        ReplSession s(dataset());
        CHECK(s.prompt() == "flatq> ");
        CHECK(s.feed("for event in dataset:").text.empty());
        CHECK(s.prompt() == "...    ");
        s.feed("  fill_histogram(len(event.muons))");
        auto r = s.feed("");
        CHECK(r.text.rfind("flat over 500 events\nh: fills=500", 0) == 0);
        REQUIRE(s.last_result().has_value());
        CHECK(s.last_result()->at("h").spec() == HistogramSpec{"h", 100, 0, 200});
        CHECK_FALSE(s.pending());
    }

    TEST_CASE("switching engine keeps the summary") {
        ReplSession s(dataset());
        auto run_query = [&] {
            for (const char *l : {"# hist: m:10:0:100", "for event in dataset:", "  for m in event.muons:",
                                  "    fill_histogram(m.pt)"})
                s.feed(l);
            auto text = s.feed("").text;
            return text.substr(text.find('\n'));
        };
        auto flat = run_query();
        CHECK(s.feed(":engine baseline").text.find("baseline") != std::string::npos);
        CHECK(s.engine() == Engine::Baseline);
        CHECK(run_query() == flat);
        CHECK(flat.find("m: fills=") != std::string::npos);
    }

    TEST_CASE("errors are rendered with a caret and the session continues") {
        ReplSession s(dataset());
        s.feed("for event in dataset:");
        s.feed("  fill_histogram(event.nope)");
        auto r = s.feed("");
        CHECK(r.text.find("<input>:2:") == 0);
        CHECK(r.text.find('^') != std::string::npos);
        CHECK_FALSE(s.pending());
        CHECK(s.feed(":engine warp").text.find("unknown") != std::string::npos);
    }

    TEST_CASE("cancel, hist and quit") {
        ReplSession s(dataset());
        s.feed("for event in dataset:");
        s.feed(":cancel");
        CHECK_FALSE(s.pending());
        s.feed(":hist a:5:0:5");
        s.feed("for event in dataset:");
        s.feed("  fill_histogram(1.0)");
        s.feed("");
        CHECK(s.last_result()->count("a") == 1);
        CHECK(s.feed(":help").text.find(":engine") != std::string::npos);
        CHECK(s.feed(":quit").quit);
    }
}
