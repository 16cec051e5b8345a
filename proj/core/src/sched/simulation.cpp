#include "flatq/sched/simulation.hpp"

#include "flatq/columnar/generator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

namespace flatq::sched {

using nlohmann::json;

std::string_view to_string(Policy p) {
    switch (p) {
    case Policy::TwoRoundPull: return "two-round-pull";
    case Policy::RoundRobinPush: return "round-robin-push";
    case Policy::LeastBusyPush: return "least-busy-push";
    case Policy::AnyPullNoAffinity: return "any-pull-no-affinity";
    }
    return "?";
}

std::optional<Policy> policy_from_name(std::string_view name) {
    for (auto p : {Policy::TwoRoundPull, Policy::RoundRobinPush, Policy::LeastBusyPush, Policy::AnyPullNoAffinity})
        if (to_string(p) == name) return p;
    return std::nullopt;
}

std::string_view to_string(PayloadMode p) { return p == PayloadMode::Real ? "real" : "delay"; }

std::optional<PayloadMode> payload_from_name(std::string_view name) {
    if (name == "real") return PayloadMode::Real;
    if (name == "delay") return PayloadMode::Delay;
    return std::nullopt;
}

void ClusterConfig::validate() const {
    auto need = [](bool ok, const char *what) {
        if (!ok) throw std::invalid_argument(std::string("invalid cluster config: ") + what);
    };
    need(workers >= 1, "workers must be at least 1");
    need(cache_bytes >= 0, "cache_bytes must be non-negative");
    need(round2_delay >= 0 && snapshot_interval > 0 && max_time > 0, "times must be positive");
    need(load_bytes_per_sec > 0 && compute_events_per_sec > 0, "rates must be positive");
    need(load_overhead >= 0 && compute_overhead >= 0, "overheads must be non-negative");
    need(delay_min >= 0 && delay_min <= delay_max, "need 0 <= delay_min <= delay_max");
    need(jitter >= 0.0 && jitter < 1.0, "jitter must be in [0, 1)");
    need(lease_factor > 0.0, "lease_factor must be positive");
    for (const auto &f : faults) need(f.worker >= 0 && f.worker < workers && f.at >= 0, "fault names an unknown worker");
    for (const auto &s : stragglers)
        need(s.worker >= 0 && s.worker < workers && s.slowdown > 0.0, "straggler names an unknown worker");
}

namespace {

enum class Ev : std::uint8_t { Arrival, Poll, LocalPoll, Round2, LoadDone, ComputeDone, LeaseCheck, Death, Snapshot, Cancel, Wake };

struct Event {
    Micros t;
    std::uint64_t seq;
    Ev kind;
    int worker = -1;
    std::uint64_t gen = 0;
    std::int64_t arg = 0;  // arrival index or query id

    bool operator>(const Event &o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

struct Worker {
    int id;
    LruCache cache;
    bool alive = true;
    enum class State : std::uint8_t { Idle, PollPending, Waiting, Busy } state = State::Idle;
    std::uint64_t gen = 0;
    std::optional<Claim> claim;
    bool hit = false;
    Micros busy_since = 0;
    double slowdown = 1.0;
    WorkerMetrics metrics;
};

class Simulation {
public:
    Simulation(const ClusterConfig &cfg, const Workload &wl, std::uint64_t seed)
        : cfg_(cfg), wl_(wl), rng_(seed) {
        result_.policy = cfg.policy;
        result_.payload = cfg.payload;
        result_.seed = seed;
        cfg_.validate();
        for (int w = 0; w < cfg_.workers; ++w) {
            Worker worker{w, LruCache(cfg_.cache_bytes), true, Worker::State::Idle, 0, std::nullopt, false, 0, 1.0, {}};
            worker.metrics.id = w;
            for (const auto &s : cfg_.stragglers)
                if (s.worker == w) worker.slowdown = s.slowdown;
            workers_.push_back(std::move(worker));
        }
        double total = 0.0;
        int count = 0;
        for (const auto &d : wl_.datasets) {
            coord_.register_dataset(d.id, d.data, d.partitions);
            for (const auto &p : coord_.partitions(d.id)) {
                total += static_cast<double>(load_time(p.byte_size) + compute_time(p.num_entries()));
                ++count;
            }
            replication_[d.id] = 0;
            result_.replication.push_back({0, d.id, 0});
        }
        lease_ = std::max<Micros>(1, static_cast<Micros>(cfg_.lease_factor * (count ? total / count : 1.0)));
    }

    SimulationResult run() {
        if (wl_.sequential) {
            if (!wl_.queries.empty()) push({wl_.queries.front().at, 0, Ev::Arrival, -1, 0, 0});
        } else {
            for (std::size_t i = 0; i < wl_.queries.size(); ++i)
                push({wl_.queries[i].at, 0, Ev::Arrival, -1, 0, static_cast<std::int64_t>(i)});
        }
        for (const auto &f : cfg_.faults) push({f.at, 0, Ev::Death, f.worker, 0, 0});

        while (!queue_.empty()) {
            Event e = queue_.top();
            queue_.pop();
            if (e.t > cfg_.max_time) break;
            now_ = e.t;
            dispatch(e);
        }
        finish();
        return std::move(result_);
    }

private:
    void push(Event e) {
        e.seq = seq_++;
        queue_.push(e);
    }

    Micros jittered(double us, double slowdown) {
        double f = 1.0;
        if (cfg_.jitter > 0.0) f += cfg_.jitter * (2.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng_) - 1.0);
        return std::max<Micros>(1, static_cast<Micros>(std::llround(us * f * slowdown)));
    }

    Micros load_time(std::int64_t bytes) const {
        return cfg_.load_overhead + static_cast<Micros>(static_cast<double>(bytes) / cfg_.load_bytes_per_sec * 1e6);
    }

    Micros compute_time(std::int64_t events) const {
        if (cfg_.payload == PayloadMode::Delay) return (cfg_.delay_min + cfg_.delay_max) / 2;
        return cfg_.compute_overhead + static_cast<Micros>(static_cast<double>(events) / cfg_.compute_events_per_sec * 1e6);
    }

    Micros sample_compute(std::int64_t events, double slowdown) {
        if (cfg_.payload == PayloadMode::Delay) {
            auto d = std::uniform_int_distribution<Micros>(cfg_.delay_min, cfg_.delay_max)(rng_);
            return std::max<Micros>(1, static_cast<Micros>(std::llround(static_cast<double>(d) * slowdown)));
        }
        return jittered(static_cast<double>(compute_time(events)), slowdown);
    }

    void dispatch(const Event &e) {
        switch (e.kind) {
        case Ev::Arrival: arrive(static_cast<std::size_t>(e.arg)); break;
        case Ev::Poll:
            if (valid(e)) poll(workers_[static_cast<std::size_t>(e.worker)]);
            break;
        case Ev::LocalPoll:
            if (valid(e)) local_poll(workers_[static_cast<std::size_t>(e.worker)]);
            break;
        case Ev::Round2:
            if (valid(e)) round2(workers_[static_cast<std::size_t>(e.worker)]);
            break;
        case Ev::LoadDone:
            if (valid(e)) load_done(workers_[static_cast<std::size_t>(e.worker)]);
            break;
        case Ev::ComputeDone:
            if (valid(e)) compute_done(workers_[static_cast<std::size_t>(e.worker)]);
            break;
        case Ev::LeaseCheck: {
            auto ids = coord_.expire_leases(now_);
            result_.lease_expirations += static_cast<std::int64_t>(ids.size());
            if (!ids.empty()) wake_idle();
            break;
        }
        case Ev::Death: kill(workers_[static_cast<std::size_t>(e.worker)]); break;
        case Ev::Snapshot: snapshot_tick(); break;
        case Ev::Cancel: cancel(e.arg); break;
        case Ev::Wake: wake_idle(); break;
        }
    }

    bool valid(const Event &e) const {
        const Worker &w = workers_[static_cast<std::size_t>(e.worker)];
        return w.alive && w.gen == e.gen;
    }

    // ---- queries ----

    void arrive(std::size_t index) {
        const QueryArrival &a = wl_.queries[index];
        QueryId qid = coord_.submit_query(a.source, a.dataset_id, a.specs, 0, now_);
        QueryMetrics m;
        m.id = qid;
        m.name = a.name;
        m.dataset_id = a.dataset_id;
        m.submitted_at = now_;
        m.subtasks = coord_.status(qid).total;
        query_index_[qid] = result_.queries.size();
        result_.queries.push_back(m);
        arrival_of_[qid] = index;
        active_.insert(qid);
        if (a.cancel_after) push({now_ + *a.cancel_after, 0, Ev::Cancel, -1, 0, qid});
        if (cfg_.policy == Policy::RoundRobinPush || cfg_.policy == Policy::LeastBusyPush) designate(qid);
        if (!snapshot_pending_) {
            snapshot_pending_ = true;
            push({now_ + cfg_.snapshot_interval, 0, Ev::Snapshot, -1, 0, 0});
        }
        wake_idle();
    }

    void designate(QueryId qid) {
        std::vector<int> live;
        for (const auto &w : workers_)
            if (w.alive) live.push_back(w.id);
        if (live.empty()) return;
        Micros until = now_ + lease_;
        for (const auto &s : coord_.subtasks(qid)) {
            int target;
            if (cfg_.policy == Policy::RoundRobinPush) {
                target = live[rr_++ % live.size()];
            } else {
                target = live.front();
                auto load = [&](int w) {
                    return pending_[w] + (workers_[static_cast<std::size_t>(w)].state == Worker::State::Busy ? 1 : 0);
                };
                for (int w : live)
                    if (load(w) < load(target)) target = w;
            }
            coord_.designate(s.id, target, until);
            designated_to_[s.id] = target;
            ++pending_[target];
        }
        push({until, 0, Ev::Wake, -1, 0, 0});
    }

    void next_sequential(QueryId finished) {
        if (!wl_.sequential) return;
        std::size_t next = arrival_of_.at(finished) + 1;
        if (next < wl_.queries.size()) push({now_, 0, Ev::Arrival, -1, 0, static_cast<std::int64_t>(next)});
    }

    void cancel(QueryId qid) {
        auto st = coord_.status(qid);
        if (st.cancelled || st.completed_at) return;
        coord_.cancel_query(qid);
        result_.queries[query_index_.at(qid)].cancelled = true;
        active_.erase(qid);
        for (const auto &s : coord_.subtasks(qid)) release_designation(s.id);
        next_sequential(qid);
    }

    void release_designation(SubtaskId id) {
        auto it = designated_to_.find(id);
        if (it == designated_to_.end()) return;
        --pending_[it->second];
        designated_to_.erase(it);
    }

    void record_snapshot(QueryId qid) {
        Snapshot s = coord_.aggregate(qid, now_);
        std::int64_t fills = 0;
        for (const auto &kv : s.histograms) fills += kv.second.num_fills();
        result_.snapshots.push_back({now_, qid, s.fraction, fills});
        if (s.done == s.total) {
            result_.queries[query_index_.at(qid)].num_fills = fills;
            result_.results[qid] = std::move(s.histograms);
        }
    }

    void snapshot_tick() {
        snapshot_pending_ = false;
        for (QueryId q : active_) record_snapshot(q);
        if (!active_.empty()) {
            snapshot_pending_ = true;
            push({now_ + cfg_.snapshot_interval, 0, Ev::Snapshot, -1, 0, 0});
        }
    }

    // ---- workers ----

    // Workers sitting out the round-2 delay still take cache-local work as soon as it appears.
    void wake_idle() {
        for (auto &w : workers_) {
            if (!w.alive) continue;
            if (w.state == Worker::State::Idle) {
                w.state = Worker::State::PollPending;
                push({now_, 0, Ev::Poll, w.id, w.gen, 0});
            } else if (w.state == Worker::State::Waiting) {
                push({now_, 0, Ev::LocalPoll, w.id, w.gen, 0});
            }
        }
    }

    std::set<PartitionKey> cached(const Worker &w) const {
        auto keys = w.cache.keys();
        return {keys.begin(), keys.end()};
    }

    void go_idle(Worker &w) { w.state = Worker::State::Idle; }

    void poll(Worker &w) {
        std::optional<Claim> c;
        switch (cfg_.policy) {
        case Policy::TwoRoundPull:
            c = coord_.claim_local(w.id, cached(w), now_, lease_);
            if (!c && coord_.has_advertised()) {
                w.state = Worker::State::Waiting;
                push({now_ + cfg_.round2_delay, 0, Ev::Round2, w.id, w.gen, 0});
                return;
            }
            break;
        case Policy::AnyPullNoAffinity: c = coord_.claim_any(w.id, now_, lease_); break;
        case Policy::RoundRobinPush:
        case Policy::LeastBusyPush:
            c = coord_.claim_designated(w.id, now_, lease_);
            if (!c) {
                go_idle(w);
                if (auto at = coord_.next_reservation_expiry(w.id, now_)) push({*at, 0, Ev::Poll, w.id, w.gen, 0});
                return;
            }
            break;
        }
        if (c) start(w, std::move(*c));
        else go_idle(w);
    }

    void local_poll(Worker &w) {
        if (w.state != Worker::State::Waiting) return;
        if (auto c = coord_.claim_local(w.id, cached(w), now_, lease_)) start(w, std::move(*c));
    }

    void round2(Worker &w) {
        auto c = coord_.claim_local(w.id, cached(w), now_, lease_);
        if (!c) c = coord_.claim_any(w.id, now_, lease_);
        if (c) start(w, std::move(*c));
        else go_idle(w);
    }

    void start(Worker &w, Claim c) {
        ++w.gen;
        w.state = Worker::State::Busy;
        w.busy_since = now_;
        release_designation(c.subtask);
        PartitionKey key = c.key();
        w.hit = w.cache.contains(key);
        ++w.metrics.executions;
        ++result_.executions;
        auto &qm = result_.queries[query_index_.at(c.query)];
        ++qm.executions;
        push({c.lease_expiry, 0, Ev::LeaseCheck, -1, 0, 0});
        if (w.hit) {
            ++w.metrics.cache_hits;
            ++result_.cache_hits;
            ++qm.cache_hits;
            w.cache.touch(key);
            push({now_ + sample_compute(c.partition.num_entries(), w.slowdown), 0, Ev::ComputeDone, w.id, w.gen, 0});
        } else {
            Micros t = jittered(static_cast<double>(load_time(c.partition.byte_size)), w.slowdown);
            push({now_ + t, 0, Ev::LoadDone, w.id, w.gen, 0});
        }
        w.claim = std::move(c);
    }

    void load_done(Worker &w) {
        const Claim &c = *w.claim;
        w.metrics.bytes_loaded += c.partition.byte_size;
        result_.bytes_loaded += c.partition.byte_size;
        w.cache.insert(c.key(), c.partition.byte_size);
        update_replication();
        push({now_ + sample_compute(c.partition.num_entries(), w.slowdown), 0, Ev::ComputeDone, w.id, w.gen, 0});
    }

    const columnar::ColumnarDataset &slice_of(const Claim &c) {
        auto key = c.key();
        auto it = slices_.find(key);
        if (it == slices_.end()) {
            auto data = coord_.dataset(c.partition.dataset_id);
            it = slices_.emplace(key, columnar::slice(*data, c.partition.begin, c.partition.end)).first;
        }
        return it->second;
    }

    void compute_done(Worker &w) {
        Claim c = std::move(*w.claim);
        w.claim.reset();
        w.metrics.busy_time += now_ - w.busy_since;
        exec::HistogramMap partial;
        if (cfg_.payload == PayloadMode::Real)
            partial = exec::run_flat(c.program->flat, slice_of(c), c.program->specs);
        else
            partial = exec::make_histograms(c.program->specs);
        Ack ack = coord_.complete(w.id, c.subtask, c.attempt, std::move(partial), now_);
        if (ack == Ack::Duplicate) ++result_.duplicates;
        if (ack == Ack::Accepted) {
            auto st = coord_.status(c.query);
            if (st.completed_at) {
                active_.erase(c.query);
                result_.queries[query_index_.at(c.query)].completed_at = st.completed_at;
                record_snapshot(c.query);
                next_sequential(c.query);
            }
        }
        ++w.gen;
        w.state = Worker::State::PollPending;
        push({now_, 0, Ev::Poll, w.id, w.gen, 0});
    }

    void kill(Worker &w) {
        if (!w.alive) return;
        if (w.state == Worker::State::Busy) w.metrics.busy_time += now_ - w.busy_since;
        w.alive = false;
        w.metrics.alive = false;
        ++w.gen;
        w.claim.reset();
        update_replication();
    }

    void update_replication() {
        for (auto &[dataset, last] : replication_) {
            int n = 0;
            for (const auto &w : workers_) {
                if (!w.alive) continue;
                auto keys = w.cache.keys();
                if (std::any_of(keys.begin(), keys.end(), [&](const PartitionKey &k) { return k.dataset_id == dataset; })) ++n;
            }
            if (n != last) {
                last = n;
                result_.replication.push_back({now_, dataset, n});
            }
        }
    }

    void finish() {
        Micros end = 0;
        for (const auto &q : result_.queries)
            if (q.completed_at) end = std::max(end, *q.completed_at);
        result_.makespan = end;
        for (auto &w : workers_) {
            w.metrics.utilization = end > 0 ? static_cast<double>(w.metrics.busy_time) / static_cast<double>(end) : 0.0;
            result_.workers.push_back(w.metrics);
        }
        result_.completions = coord_.completion_log();
    }

    ClusterConfig cfg_;
    const Workload &wl_;
    std::mt19937_64 rng_;
    SimulationResult result_;
    Coordinator coord_;
    std::vector<Worker> workers_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t seq_ = 0;
    Micros now_ = 0;
    Micros lease_ = 1;
    bool snapshot_pending_ = false;
    std::size_t rr_ = 0;
    std::set<QueryId> active_;
    std::map<QueryId, std::size_t> query_index_;
    std::map<QueryId, std::size_t> arrival_of_;
    std::map<SubtaskId, int> designated_to_;
    std::map<int, int> pending_;
    std::map<std::string, int> replication_;
    std::map<PartitionKey, columnar::ColumnarDataset> slices_;
};

json opt_time(const std::optional<Micros> &t) { return t ? json(*t) : json(nullptr); }

}  // namespace

SimulationResult simulate(const ClusterConfig &config, const Workload &workload, std::uint64_t seed) {
    return Simulation(config, workload, seed).run();
}

std::string SimulationResult::metrics_json() const {
    json qs = json::array();
    for (const auto &q : queries) {
        qs.push_back({{"id", q.id},
                      {"name", q.name},
                      {"dataset", q.dataset_id},
                      {"submitted_us", q.submitted_at},
                      {"completed_us", opt_time(q.completed_at)},
                      {"latency_us", q.completed_at ? json(*q.completed_at - q.submitted_at) : json(nullptr)},
                      {"cancelled", q.cancelled},
                      {"subtasks", q.subtasks},
                      {"executions", q.executions},
                      {"cache_hits", q.cache_hits},
                      {"num_fills", q.num_fills}});
    }
    json ws = json::array();
    for (const auto &w : workers) {
        ws.push_back({{"id", w.id},
                      {"alive", w.alive},
                      {"executions", w.executions},
                      {"cache_hits", w.cache_hits},
                      {"bytes_loaded", w.bytes_loaded},
                      {"busy_us", w.busy_time},
                      {"utilization", w.utilization}});
    }
    json j = {{"policy", std::string(to_string(policy))},
              {"payload", std::string(to_string(payload))},
              {"seed", seed},
              {"makespan_us", makespan},
              {"executions", executions},
              {"cache_hits", cache_hits},
              {"cache_hit_rate", hit_rate()},
              {"bytes_loaded", bytes_loaded},
              {"lease_expirations", lease_expirations},
              {"duplicates_discarded", duplicates},
              {"queries", qs},
              {"workers", ws}};
    return j.dump(2);
}

std::string SimulationResult::timeseries_csv() const {
    struct Row {
        Micros t;
        std::string text;
    };
    std::vector<Row> rows;
    char buf[256];
    for (const auto &s : snapshots) {
        std::snprintf(buf, sizeof buf, "%lld,snapshot,%lld,%.6f,%lld,,\n", static_cast<long long>(s.time),
                      static_cast<long long>(s.query), s.fraction, static_cast<long long>(s.num_fills));
        rows.push_back({s.time, buf});
    }
    for (const auto &r : replication) {
        std::snprintf(buf, sizeof buf, "%lld,cache,,,,%s,%d\n", static_cast<long long>(r.time), r.dataset_id.c_str(),
                      r.workers);
        rows.push_back({r.time, buf});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row &a, const Row &b) { return a.t < b.t; });
    std::string out = "time_us,kind,query,fraction_complete,num_fills,dataset,workers_caching\n";
    for (const auto &r : rows) out += r.text;
    return out;
}

ClusterConfig config_from_json(std::string_view text, ClusterConfig c) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("cluster config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("cluster config must be a JSON object");
    try {
        for (const auto &[key, v] : j.items()) {
            if (key == "workers") c.workers = v.get<int>();
            else if (key == "cache_bytes") c.cache_bytes = v.get<std::int64_t>();
            else if (key == "cache_mb") c.cache_bytes = static_cast<std::int64_t>(v.get<double>() * 1024 * 1024);
            else if (key == "policy") {
                auto p = policy_from_name(v.get<std::string>());
                if (!p) throw std::invalid_argument("unknown policy '" + v.get<std::string>() + "'");
                c.policy = *p;
            } else if (key == "payload") {
                auto p = payload_from_name(v.get<std::string>());
                if (!p) throw std::invalid_argument("unknown payload '" + v.get<std::string>() + "'");
                c.payload = *p;
            } else if (key == "round2_delay_us") c.round2_delay = v.get<Micros>();
            else if (key == "snapshot_interval_us") c.snapshot_interval = v.get<Micros>();
            else if (key == "max_time_us") c.max_time = v.get<Micros>();
            else if (key == "load_bytes_per_sec") c.load_bytes_per_sec = v.get<double>();
            else if (key == "load_overhead_us") c.load_overhead = v.get<Micros>();
            else if (key == "compute_events_per_sec") c.compute_events_per_sec = v.get<double>();
            else if (key == "compute_overhead_us") c.compute_overhead = v.get<Micros>();
            else if (key == "delay_min_us") c.delay_min = v.get<Micros>();
            else if (key == "delay_max_us") c.delay_max = v.get<Micros>();
            else if (key == "jitter") c.jitter = v.get<double>();
            else if (key == "lease_factor") c.lease_factor = v.get<double>();
            else if (key == "faults") {
                c.faults.clear();
                for (const auto &f : v) c.faults.push_back({f.at("worker").get<int>(), f.at("at_us").get<Micros>()});
            } else if (key == "stragglers") {
                c.stragglers.clear();
                for (const auto &s : v) c.stragglers.push_back({s.at("worker").get<int>(), s.at("slowdown").get<double>()});
            } else {
                throw std::invalid_argument("unknown cluster config key '" + key + "'");
            }
        }
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("bad cluster config: ") + e.what());
    }
    c.validate();
    return c;
}

namespace {

void reject_unknown(const json &obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) throw std::invalid_argument(std::string(where) + " must be a JSON object");
    for (const auto &item : obj.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument("unknown key '" + item.key() + "' in " + std::string(where));
}

}  // namespace

Workload workload_from_json(std::string_view text, const std::vector<exec::CorpusQuery> &corpus) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("workload is not valid JSON: ") + e.what());
    }
    reject_unknown(j, {"sequential", "datasets", "queries"}, "workload");
    Workload wl;
    try {
        wl.sequential = j.value("sequential", false);
        for (const auto &d : j.at("datasets")) {
            reject_unknown(d, {"id", "events", "seed", "partitions"}, "dataset");
            auto data = std::make_shared<const columnar::ColumnarDataset>(
                columnar::generate_events(d.at("events").get<std::int64_t>(), d.value("seed", std::uint64_t{1})));
            wl.datasets.push_back({d.at("id").get<std::string>(), std::move(data), d.value("partitions", 1)});
        }
        for (const auto &q : j.at("queries")) {
            reject_unknown(q, {"query", "source", "hist", "dataset", "at_us", "repeat", "interval_us", "cancel_after_us"},
                           "query");
            QueryArrival base;
            if (q.contains("query")) {
                auto name = q.at("query").get<std::string>();
                auto it = std::find_if(corpus.begin(), corpus.end(), [&](const auto &c) { return c.name == name; });
                if (it == corpus.end()) throw std::invalid_argument("workload: no corpus query named '" + name + "'");
                const auto &cq = *it;
                base.name = cq.name;
                base.source = cq.source;
                base.specs = cq.specs;
            } else {
                base.name = "inline";
                base.source = q.at("source").get<std::string>();
                base.specs = exec::parse_hist_directives(base.source);
            }
            if (q.contains("hist")) {
                base.specs.clear();
                for (const auto &h : q.at("hist")) base.specs.push_back(exec::HistogramSpec::parse(h.get<std::string>()));
            }
            base.dataset_id = q.at("dataset").get<std::string>();
            if (q.contains("cancel_after_us")) base.cancel_after = q.at("cancel_after_us").get<Micros>();
            Micros at = q.value("at_us", Micros{0});
            Micros interval = q.value("interval_us", Micros{0});
            int repeat = q.value("repeat", 1);
            if (repeat < 0) throw std::invalid_argument("repeat must be non-negative");
            for (int r = 0; r < repeat; ++r) {
                QueryArrival a = base;
                a.at = at + r * interval;
                wl.queries.push_back(std::move(a));
            }
        }
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("bad workload: ") + e.what());
    }
    if (!wl.sequential)
        std::stable_sort(wl.queries.begin(), wl.queries.end(),
                         [](const QueryArrival &a, const QueryArrival &b) { return a.at < b.at; });
    return wl;
}

}  // namespace flatq::sched
