#pragma once

#include "flatq/exec/corpus.hpp"
#include "flatq/exec/histogram.hpp"
#include "flatq/sched/coordinator.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::sched {

enum class Policy : std::uint8_t { TwoRoundPull, RoundRobinPush, LeastBusyPush, AnyPullNoAffinity };
enum class PayloadMode : std::uint8_t { Real, Delay };

std::string_view to_string(Policy p);
std::optional<Policy> policy_from_name(std::string_view name);
std::string_view to_string(PayloadMode p);
std::optional<PayloadMode> payload_from_name(std::string_view name);

struct WorkerFault {
    int worker = 0;
    Micros at = 0;  // the worker stops at this time and never returns
};

struct Straggler {
    int worker = 0;
    double slowdown = 1.0;  // multiplies load and compute time
};

struct ClusterConfig {
    int workers = 4;
    std::int64_t cache_bytes = 64ll << 20;  // per worker
    Policy policy = Policy::TwoRoundPull;
    PayloadMode payload = PayloadMode::Real;

    Micros round2_delay = 200'000;
    Micros snapshot_interval = 250'000;  // periodic aggregation
    Micros max_time = 24ll * 3600 * 1'000'000;

    // Load time = load_overhead + bytes / load_bytes_per_sec.
    double load_bytes_per_sec = 200e6;
    Micros load_overhead = 2'000;
    // Real payloads: compute time = compute_overhead + events / compute_events_per_sec.
    double compute_events_per_sec = 5e6;
    Micros compute_overhead = 500;
    // Delay payloads: uniform compute time.
    Micros delay_min = 5'000;
    Micros delay_max = 50'000;
    /// Relative +-jitter on every load and compute duration.
    double jitter = 0.1;
    /// Lease = lease_factor x the expected subtask duration.
    double lease_factor = 10.0;

    std::vector<WorkerFault> faults;
    std::vector<Straggler> stragglers;

    /// Throws std::invalid_argument when out of range.
    void validate() const;
};

struct DatasetSpec {
    std::string id;
    std::shared_ptr<const columnar::ColumnarDataset> data;
    int partitions = 1;
};

struct QueryArrival {
    Micros at = 0;
    std::string name;  // label used in metrics
    std::string source;
    std::string dataset_id;
    std::vector<exec::HistogramSpec> specs;
    std::optional<Micros> cancel_after;  // relative to submission
};

struct Workload {
    std::vector<DatasetSpec> datasets;
    std::vector<QueryArrival> queries;
    /// Submit each query when the previous one finishes; `at` only applies to the first.
    bool sequential = false;
};

struct QueryMetrics {
    QueryId id = 0;
    std::string name;
    std::string dataset_id;
    Micros submitted_at = 0;
    std::optional<Micros> completed_at;
    bool cancelled = false;
    int subtasks = 0;
    std::int64_t executions = 0;
    std::int64_t cache_hits = 0;
    std::int64_t num_fills = 0;
};

struct WorkerMetrics {
    int id = 0;
    bool alive = true;
    std::int64_t executions = 0;
    std::int64_t cache_hits = 0;
    std::int64_t bytes_loaded = 0;
    Micros busy_time = 0;
    double utilization = 0.0;
};

/// One aggregation of a running query.
struct SnapshotSample {
    Micros time;
    QueryId query;
    double fraction;
    std::int64_t num_fills;
};

/// Number of live workers caching at least one partition of a dataset.
struct ReplicationSample {
    Micros time;
    std::string dataset_id;
    int workers;
};

struct SimulationResult {
    Policy policy = Policy::TwoRoundPull;
    PayloadMode payload = PayloadMode::Real;
    std::uint64_t seed = 0;
    Micros makespan = 0;
    std::int64_t executions = 0;
    std::int64_t cache_hits = 0;
    std::int64_t bytes_loaded = 0;
    std::int64_t lease_expirations = 0;
    std::int64_t duplicates = 0;
    std::vector<QueryMetrics> queries;
    std::vector<WorkerMetrics> workers;
    std::vector<SnapshotSample> snapshots;
    std::vector<ReplicationSample> replication;
    /// Final aggregate per completed query.
    std::map<QueryId, exec::HistogramMap> results;
    std::vector<CompletionRecord> completions;

    double hit_rate() const {
        return executions ? static_cast<double>(cache_hits) / static_cast<double>(executions) : 0.0;
    }
    std::string metrics_json() const;
    /// time_us,kind,query,fraction_complete,num_fills,dataset,workers_caching
    std::string timeseries_csv() const;
};

/// Runs the cluster on a virtual clock. Same inputs and seed give the same result.
SimulationResult simulate(const ClusterConfig &config, const Workload &workload, std::uint64_t seed);

/// Config JSON: any subset of ClusterConfig's fields, times in microseconds; unknown keys are rejected.
ClusterConfig config_from_json(std::string_view text, ClusterConfig base = {});

/**
 * Workload JSON:
 *
 *   {"sequential": false,
 *    "datasets": [{"id": "dy", "events": 20000, "seed": 1, "partitions": 10}],
 *    "queries": [{"query": "max_pt", "dataset": "dy", "at_us": 0,
 *                 "repeat": 1, "interval_us": 0, "cancel_after_us": 500000}]}
 *
 * Datasets are generated. A query names a corpus entry or gives "source" and
 * "hist" (list of name:bins:lo:hi) inline. Unknown keys are rejected.
 */
Workload workload_from_json(std::string_view text, const std::vector<exec::CorpusQuery> &corpus);

}  // namespace flatq::sched
