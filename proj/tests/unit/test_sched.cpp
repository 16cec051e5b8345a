#include "support.hpp"

#include "flatq/columnar/generator.hpp"
#include "flatq/exec/corpus.hpp"
#include "flatq/lang/diagnostic.hpp"
#include "flatq/sched/simulation.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <thread>

using namespace flatq;
using namespace flatq::sched;

namespace {

const std::vector<exec::CorpusQuery> &corpus() {
    static const auto c = exec::load_corpus(flatq::testing::corpus_dir());
    return c;
}

std::shared_ptr<const columnar::ColumnarDataset> events(std::int64_t n, std::uint64_t seed = 1) {
    return std::make_shared<const columnar::ColumnarDataset>(columnar::generate_events(n, seed));
}

QueryId submit(Coordinator &c, const std::string &name, const std::string &dataset = "dy", Micros now = 0) {
    const auto &q = exec::find_query(corpus(), name);
    return c.submit_query(q.source, dataset, q.specs, 0, now);
}

exec::HistogramMap execute(const Coordinator &c, const Claim &claim) {
    auto data = c.dataset(claim.partition.dataset_id);
    return exec::run(*claim.program, columnar::slice(*data, claim.partition.begin, claim.partition.end),
                     exec::Engine::Flat);
}

exec::HistogramMap ground_truth(const std::string &name, const columnar::ColumnarDataset &data) {
    const auto &q = exec::find_query(corpus(), name);
    return exec::run(exec::compile_query(q.source, data.schema(), q.specs), data, exec::Engine::Flat);
}

constexpr Micros kLease = 1'000'000;

}  // namespace

TEST_SUITE("lru cache") {
    TEST_CASE("evicts least recently used first") {
        LruCache c(100);
        c.insert({"d", 0}, 40);
        c.insert({"d", 1}, 40);
        c.touch({"d", 0});
        auto evicted = c.insert({"d", 2}, 40);
        REQUIRE(evicted.size() == 1);
        CHECK(evicted[0] == PartitionKey{"d", 1});
        CHECK(c.keys() == std::vector<PartitionKey>{{"d", 2}, {"d", 0}});
        CHECK(c.used_bytes() == 80);
    }

    TEST_CASE("oversized items are not cached and re-inserts only touch") {
        LruCache c(100);
        CHECK(c.insert({"d", 0}, 101).empty());
        CHECK(c.size() == 0);
        c.insert({"d", 0}, 60);
        c.insert({"d", 1}, 30);
        c.insert({"d", 0}, 60);
        CHECK(c.keys().front() == PartitionKey{"d", 0});
        CHECK(c.used_bytes() == 90);
        auto evicted = c.insert({"d", 2}, 100);
        CHECK(evicted.size() == 2);
        CHECK(c.used_bytes() == 100);
        c.clear();
        CHECK(c.used_bytes() == 0);
    }

    TEST_CASE("used bytes never exceed capacity") {
        flatq::testing::Rng rng(3);
        LruCache c(1000);
        for (int i = 0; i < 5000; ++i) {
            PartitionKey k{"d", std::uniform_int_distribution<int>(0, 40)(rng)};
            if (rng() % 3 == 0)
                c.touch(k);
            else
                c.insert(k, std::uniform_int_distribution<int>(1, 400)(rng));
            CHECK(c.used_bytes() <= c.capacity());
            CHECK(c.keys().size() == c.size());
        }
    }
}

TEST_SUITE("coordinator") {
    TEST_CASE("one subtask per partition with unique ids") {
        Coordinator c;
        c.register_dataset("dy", events(1000), 10);
        auto q1 = submit(c, "max_pt");
        CHECK(c.subtasks(q1).size() == 10);
        CHECK(c.advertised_count() == 10);
        auto q2 = submit(c, "fill_all_pt");
        std::set<SubtaskId> ids;
        for (auto q : {q1, q2})
            for (const auto &s : c.subtasks(q)) ids.insert(s.id);
        CHECK(ids.size() == 20);
        CHECK(c.status(q1).total == 10);
        CHECK_THROWS_AS(c.register_dataset("dy", events(10), 2), std::invalid_argument);
    }

    TEST_CASE("rejected submissions advertise nothing") {
        Coordinator c;
        c.register_dataset("dy", events(100), 4);
        CHECK_THROWS_AS(c.submit_query("for event in dataset\n  fill_histogram(1.0)\n", "dy", {{"h", 1, 0, 1}}, 0, 0),
                        lang::QueryError);
        CHECK_THROWS_AS(submit(c, "max_pt", "nope"), std::out_of_range);
        const auto &q = exec::find_query(corpus(), "max_pt");
        CHECK_THROWS_AS(c.submit_query(q.source, "dy", q.specs, 3, 0), std::invalid_argument);
        CHECK(c.advertised_count() == 0);
        CHECK(c.queries().empty());
    }

    TEST_CASE("claims are exclusive and local claims prefer cached partitions") {
        Coordinator c;
        c.register_dataset("dy", events(1000), 5);
        submit(c, "max_pt");
        auto local = c.claim_local(0, {{"dy", 3}}, 0, kLease);
        REQUIRE(local);
        CHECK(local->partition.index == 3);
        CHECK_FALSE(c.claim_local(1, {{"dy", 3}}, 0, kLease));
        auto any = c.claim_any(1, 0, kLease);
        REQUIRE(any);
        CHECK(any->partition.index == 0);
        CHECK(any->attempt == 1);
        CHECK(any->lease_expiry == kLease);
        CHECK(c.advertised_count() == 3);
    }

    TEST_CASE("completion protocol") {
        Coordinator c;
        c.register_dataset("dy", events(200), 2);
        auto q = submit(c, "max_pt");
        auto a = *c.claim_any(0, 0, kLease);
        CHECK_THROWS_AS(c.complete(0, 9999, 1, {}, 5), ProtocolError);
        CHECK_THROWS_AS(c.complete(0, a.subtask, 2, execute(c, a), 5), ProtocolError);
        CHECK_THROWS_AS(c.complete(0, a.subtask, 1, exec::make_histograms({{"x", 1, 0, 1}}), 5), ProtocolError);

        // The lease lapses, another worker takes over, then both report.
        CHECK(c.expire_leases(kLease) == std::vector<SubtaskId>{a.subtask});
        auto b = *c.claim_any(1, kLease, kLease);
        CHECK(b.subtask == a.subtask);
        CHECK(b.attempt == 2);
        CHECK(c.complete(0, a.subtask, 1, execute(c, a), kLease + 1) == Ack::Accepted);
        CHECK(c.complete(1, b.subtask, 2, execute(c, b), kLease + 2) == Ack::Duplicate);
        CHECK(c.status(q).done == 1);

        auto last = *c.claim_any(1, kLease + 3, kLease);
        CHECK(c.complete(1, last.subtask, 1, execute(c, last), kLease + 4) == Ack::Accepted);
        CHECK(c.status(q).completed_at == kLease + 4);
        auto snap = c.aggregate(q, kLease + 5);
        CHECK(snap.fraction == 1.0);
        CHECK(snap.histograms == ground_truth("max_pt", *c.dataset("dy")));
        CHECK(c.completion_log().size() == 3);
    }

    TEST_CASE("aggregate progress is monotonic and ends exact") {
        Coordinator c;
        c.register_dataset("dy", events(3000), 7);
        auto q = submit(c, "fill_all_pt");
        double last = 0.0;
        std::int64_t fills = 0;
        Micros now = 0;
        while (auto claim = c.claim_any(0, now, kLease)) {
            c.complete(0, claim->subtask, claim->attempt, execute(c, *claim), ++now);
            auto s = c.aggregate(q, now);
            CHECK(s.fraction >= last);
            CHECK(s.histograms.at("pt").num_fills() >= fills);
            last = s.fraction;
            fills = s.histograms.at("pt").num_fills();
        }
        CHECK(last == 1.0);
        CHECK(c.aggregate(q, now).histograms == ground_truth("fill_all_pt", *c.dataset("dy")));
    }

    TEST_CASE("cancellation withdraws work and discards late results") {
        Coordinator c;
        c.register_dataset("dy", events(500), 4);
        auto q = submit(c, "max_pt");
        auto running = *c.claim_any(0, 0, kLease);
        c.cancel_query(q);
        c.cancel_query(q);
        CHECK(c.advertised_count() == 0);
        CHECK_FALSE(c.claim_any(1, 0, kLease));
        CHECK(c.complete(0, running.subtask, 1, execute(c, running), 10) == Ack::Cancelled);
        CHECK(c.status(q).cancelled);
        CHECK_FALSE(c.status(q).completed_at);

        // Cancelling before anyone pulls means nothing executes; a resubmission starts fresh.
        auto q2 = submit(c, "max_pt");
        c.cancel_query(q2);
        CHECK_FALSE(c.claim_any(0, 0, kLease));
        auto q3 = submit(c, "max_pt");
        CHECK(c.advertised_count() == 4);
        while (auto claim = c.claim_any(0, 20, kLease)) c.complete(0, claim->subtask, claim->attempt, execute(c, *claim), 30);
        CHECK(c.status(q3).done == 4);
    }

    TEST_CASE("reservations hold until they expire") {
        Coordinator c;
        c.register_dataset("dy", events(500), 2);
        auto q = submit(c, "max_pt");
        auto first = c.subtasks(q)[0].id;
        c.designate(first, 1, 100);
        auto other = c.claim_any(0, 0, kLease);
        REQUIRE(other);
        CHECK(other->subtask != first);
        CHECK_FALSE(c.claim_any(0, 50, kLease));
        CHECK(c.next_reservation_expiry(0, 50) == 100);
        CHECK_FALSE(c.next_reservation_expiry(1, 50));
        auto mine = c.claim_designated(1, 50, kLease);
        REQUIRE(mine);
        CHECK(mine->subtask == first);

        auto q2 = submit(c, "max_pt");
        c.designate(c.subtasks(q2)[0].id, 1, 100);
        CHECK(c.claim_any(0, 100, kLease));
    }

    TEST_CASE("concurrent workers complete every subtask exactly once") {
        Coordinator c;
        auto data = events(20000, 5);
        c.register_dataset("dy", data, 40);
        std::vector<QueryId> qs;
        for (const char *name : {"max_pt", "fill_all_pt", "pt_sum_of_pairs"}) qs.push_back(submit(c, name));
        std::atomic<int> accepted{0};
        std::vector<std::thread> threads;
        for (int w = 0; w < 8; ++w)
            threads.emplace_back([&, w] {
                std::set<PartitionKey> cached;
                while (true) {
                    auto claim = c.claim_local(w, cached, 0, kLease);
                    if (!claim) claim = c.claim_any(w, 0, kLease);
                    if (!claim) break;
                    cached.insert(claim->key());
                    if (c.complete(w, claim->subtask, claim->attempt, execute(c, *claim), 1) == Ack::Accepted) ++accepted;
                }
            });
        for (auto &t : threads) t.join();
        CHECK(accepted == 120);
        CHECK(c.completion_log().size() == 120);
        std::set<SubtaskId> seen;
        for (const auto &r : c.completion_log()) CHECK(seen.insert(r.subtask).second);
        const char *names[] = {"max_pt", "fill_all_pt", "pt_sum_of_pairs"};
        for (std::size_t i = 0; i < qs.size(); ++i) CHECK(c.aggregate(qs[i], 2).histograms == ground_truth(names[i], *data));
    }
}

TEST_SUITE("simulation") {
    Workload repeated(const std::string &name, int count, std::int64_t n, int partitions, bool sequential = true) {
        Workload w;
        w.sequential = sequential;
        w.datasets.push_back({"dy", events(n, 11), partitions});
        const auto &q = exec::find_query(corpus(), name);
        for (int i = 0; i < count; ++i) w.queries.push_back({0, name, q.source, "dy", q.specs, std::nullopt});
        return w;
    }

    TEST_CASE("one worker: cold first query, fully cached second") {
        ClusterConfig cfg;
        cfg.workers = 1;
        auto r = simulate(cfg, repeated("max_pt", 2, 5000, 4), 1);
        REQUIRE(r.queries.size() == 2);
        CHECK(r.queries[0].cache_hits == 0);
        CHECK(r.queries[0].executions == 4);
        CHECK(r.queries[1].cache_hits == 4);
        CHECK(r.hit_rate() == 0.5);
        CHECK(r.workers[0].bytes_loaded == r.bytes_loaded);
        std::int64_t partition_bytes = 0;
        for (const auto &p : columnar::make_partitions(*events(5000, 11), "dy", 4)) partition_bytes += p.byte_size;
        CHECK(r.bytes_loaded == partition_bytes);
    }

    TEST_CASE("real payload results equal a direct run") {
        for (auto policy : {Policy::TwoRoundPull, Policy::RoundRobinPush, Policy::LeastBusyPush, Policy::AnyPullNoAffinity}) {
            CAPTURE(to_string(policy));
            ClusterConfig cfg;
            cfg.workers = 3;
            cfg.policy = policy;
            cfg.cache_bytes = 100'000;
            auto w = repeated("mass_of_pairs", 4, 4000, 6, false);
            auto r = simulate(cfg, w, 2);
            auto truth = ground_truth("mass_of_pairs", *w.datasets[0].data);
            REQUIRE(r.results.size() == 4);
            for (const auto &[id, h] : r.results) CHECK(h == truth);
            for (const auto &q : r.queries) CHECK(q.num_fills == truth.at("mass").num_fills());
        }
    }

    TEST_CASE("same seed, same run") {
        ClusterConfig cfg;
        cfg.workers = 4;
        cfg.faults = {{2, 30'000}};
        auto w = repeated("max_pt", 5, 5000, 8, false);
        auto a = simulate(cfg, w, 9);
        auto b = simulate(cfg, w, 9);
        CHECK(a.metrics_json() == b.metrics_json());
        CHECK(a.timeseries_csv() == b.timeseries_csv());
        CHECK(simulate(cfg, w, 10).metrics_json() != a.metrics_json());
    }

    TEST_CASE("pull policy waits the round-two delay before taking remote work") {
        ClusterConfig cfg;
        cfg.workers = 1;
        cfg.round2_delay = 1'000'000;
        auto w = repeated("max_pt", 1, 1000, 1);
        auto pull = simulate(cfg, w, 1);
        CHECK(*pull.queries[0].completed_at >= 1'000'000);
        cfg.policy = Policy::AnyPullNoAffinity;
        auto any = simulate(cfg, w, 1);
        CHECK(*any.queries[0].completed_at < 1'000'000);
    }

    TEST_CASE("dead workers and stragglers do not lose results") {
        ClusterConfig cfg;
        cfg.workers = 4;
        cfg.faults = {{0, 5'000}, {1, 20'000}};
        cfg.stragglers = {{2, 50.0}};
        auto w = repeated("fill_all_pt", 3, 8000, 8, false);
        auto r = simulate(cfg, w, 4);
        auto truth = ground_truth("fill_all_pt", *w.datasets[0].data);
        REQUIRE(r.results.size() == 3);
        for (const auto &[id, h] : r.results) CHECK(h == truth);
        CHECK_FALSE(r.workers[0].alive);
        CHECK(r.lease_expirations > 0);
    }

    TEST_CASE("cancelled queries report no result") {
        ClusterConfig cfg;
        cfg.workers = 2;
        auto w = repeated("max_pt", 2, 20000, 10, false);
        w.queries[0].cancel_after = 1;
        auto r = simulate(cfg, w, 1);
        CHECK(r.queries[0].cancelled);
        CHECK_FALSE(r.queries[0].completed_at);
        CHECK(r.results.size() == 1);
    }

    TEST_CASE("snapshots are monotonic per query") {
        ClusterConfig cfg;
        cfg.workers = 2;
        cfg.snapshot_interval = 2'000;
        auto r = simulate(cfg, repeated("fill_all_pt", 3, 20000, 10, false), 1);
        std::map<QueryId, SnapshotSample> last;
        REQUIRE(r.snapshots.size() > 3);
        for (const auto &s : r.snapshots) {
            auto it = last.find(s.query);
            if (it != last.end()) {
                CHECK(s.time >= it->second.time);
                CHECK(s.fraction >= it->second.fraction);
                CHECK(s.num_fills >= it->second.num_fills);
            }
            last[s.query] = s;
        }
    }

    TEST_CASE("delay payload") {
        ClusterConfig cfg;
        cfg.payload = PayloadMode::Delay;
        cfg.delay_min = cfg.delay_max = 10'000;
        cfg.jitter = 0.0;
        cfg.workers = 1;
        auto r = simulate(cfg, repeated("max_pt", 1, 1000, 3), 1);
        CHECK(r.executions == 3);
        CHECK(r.workers[0].busy_time >= 30'000);
    }

    TEST_CASE("metrics and timeseries output") {
        auto r = simulate({}, repeated("max_pt", 2, 2000, 2), 5);
        auto j = nlohmann::json::parse(r.metrics_json());
        for (const char *key : {"bytes_loaded", "cache_hit_rate", "cache_hits", "duplicates_discarded", "executions",
                                "lease_expirations", "makespan_us", "payload", "policy", "seed", "queries", "workers"})
            CHECK(j.contains(key));
        CHECK(j["policy"] == "two-round-pull");
        CHECK(j["queries"].size() == 2);
        CHECK(r.timeseries_csv().rfind("time_us,kind,query,fraction_complete,num_fills,dataset,workers_caching\n", 0) == 0);
    }

    TEST_CASE("config json") {
        auto cfg = config_from_json(R"({"workers": 8, "cache_mb": 2, "policy": "least-busy-push",
                                        "faults": [{"worker": 1, "at_us": 5}], "stragglers": [{"worker": 0, "slowdown": 3}]})");
        CHECK(cfg.workers == 8);
        CHECK(cfg.cache_bytes == 2 << 20);
        CHECK(cfg.policy == Policy::LeastBusyPush);
        CHECK(cfg.faults.size() == 1);
        CHECK(cfg.stragglers[0].slowdown == 3.0);
        CHECK_THROWS_AS(config_from_json(R"({"workerz": 1})"), std::invalid_argument);
        CHECK_THROWS_AS(config_from_json(R"({"policy": "random"})"), std::invalid_argument);
        CHECK_THROWS_AS(config_from_json(R"({"workers": 0})"), std::invalid_argument);
        CHECK_THROWS(config_from_json("not json"));
        for (auto p : {Policy::TwoRoundPull, Policy::RoundRobinPush, Policy::LeastBusyPush, Policy::AnyPullNoAffinity})
            CHECK(policy_from_name(to_string(p)) == p);
    }

    TEST_CASE("workload json") {
        auto w = workload_from_json(R"({
            "datasets": [{"id": "a", "events": 100, "seed": 1, "partitions": 2}],
            "queries": [
              {"query": "max_pt", "dataset": "a", "at_us": 500, "repeat": 3, "interval_us": 10},
              {"source": "for event in dataset:\n  fill_histogram(len(event.muons))\n", "hist": ["n:10:0:10"],
               "dataset": "a", "at_us": 0, "cancel_after_us": 7}]})",
                                    corpus());
        REQUIRE(w.queries.size() == 4);
        CHECK(w.queries[0].at == 0);
        CHECK(w.queries[0].cancel_after == 7);
        CHECK(w.queries[3].at == 520);
        CHECK(w.queries[1].name == "max_pt");
        CHECK(w.datasets[0].data->num_entries() == 100);
        CHECK_THROWS_AS(workload_from_json(R"({"datasets": [], "queries": [], "extra": 1})", corpus()), std::invalid_argument);
        CHECK_THROWS_AS(workload_from_json(R"({"datasets": [{"id": "a", "events": 1, "partitions": 1}],
                                               "queries": [{"query": "nope", "dataset": "a"}]})",
                                           corpus()),
                        std::invalid_argument);
    }
}
