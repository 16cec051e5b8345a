#pragma once

#include "flatq/columnar/dataset.hpp"
#include "flatq/exec/engine.hpp"
#include "flatq/sched/cache.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace flatq::sched {

/// Simulated or wall-clock time in microseconds.
using Micros = std::int64_t;
using QueryId = std::int64_t;
using SubtaskId = std::int64_t;

struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SubtaskState : std::uint8_t { Advertised, InProgress, Done, Withdrawn };

std::string_view to_string(SubtaskState s);

struct Subtask {
    SubtaskId id = 0;
    QueryId query = 0;
    columnar::Partition partition;
    SubtaskState state = SubtaskState::Advertised;
    int attempt = 0;
    int worker = -1;  // lease holder while InProgress
    Micros lease_expiry = 0;
    int designated = -1;  // push policies: preferred worker
    Micros reserved_until = 0;

    PartitionKey key() const { return {partition.dataset_id, partition.index}; }
};

/// Work handed to a worker.
struct Claim {
    SubtaskId subtask = 0;
    QueryId query = 0;
    int attempt = 0;
    columnar::Partition partition;
    Micros lease_expiry = 0;
    std::shared_ptr<const exec::CompiledQuery> program;

    PartitionKey key() const { return {partition.dataset_id, partition.index}; }
};

enum class Ack : std::uint8_t { Accepted, Duplicate, Cancelled };

std::string_view to_string(Ack a);

struct CompletionRecord {
    SubtaskId subtask;
    QueryId query;
    int worker;
    int attempt;
    Micros time;
    Ack ack;
};

struct Snapshot {
    exec::HistogramMap histograms;
    int done = 0;
    int total = 0;
    double fraction = 0.0;
    Micros taken_at = 0;
};

/// Partial results keyed by (query, subtask), plus the latest snapshot per query.
class ResultStore {
public:
    /// Returns false (and stores nothing) if a partial already exists for the key.
    bool put_partial(QueryId query, SubtaskId subtask, exec::HistogramMap partial);
    std::vector<std::pair<SubtaskId, const exec::HistogramMap *>> scan_partials(QueryId query) const;
    void drop_query(QueryId query);

    void put_snapshot(QueryId query, Snapshot snapshot);
    const Snapshot *last_snapshot(QueryId query) const;

private:
    std::map<std::pair<QueryId, SubtaskId>, exec::HistogramMap> partials_;
    std::map<QueryId, Snapshot> snapshots_;
};

struct QueryStatus {
    QueryId id = 0;
    std::string dataset_id;
    int total = 0;
    int done = 0;
    bool cancelled = false;
    Micros submitted_at = 0;
    std::optional<Micros> completed_at;
};

/**
 * Task board and result store behind a message-style interface. Each call
 * is one atomic transition, so workers on different threads may call it
 * concurrently. Workers report what they cache; the coordinator never
 * tracks caches itself.
 */
class Coordinator {
public:
    Coordinator() = default;
    Coordinator(const Coordinator &) = delete;
    Coordinator &operator=(const Coordinator &) = delete;

    /// Splits `dataset` into `num_partitions` ranges. Re-registering an id is an error.
    void register_dataset(const std::string &id, std::shared_ptr<const columnar::ColumnarDataset> dataset,
                          int num_partitions);
    const std::vector<columnar::Partition> &partitions(const std::string &dataset_id) const;
    std::shared_ptr<const columnar::ColumnarDataset> dataset(const std::string &dataset_id) const;

    /**
     * Compiles the query and advertises one subtask per partition.
     * `num_partitions` must be 0 (all) or the registered count. Throws
     * lang::QueryError on diagnostics, std::out_of_range for an unknown
     * dataset and std::invalid_argument for a bad partition count.
     */
    QueryId submit_query(const std::string &source, const std::string &dataset_id,
                         std::vector<exec::HistogramSpec> specs, int num_partitions, Micros now);

    /// Oldest advertised subtask whose partition is in `cached`.
    std::optional<Claim> claim_local(int worker, const std::set<PartitionKey> &cached, Micros now, Micros lease);
    /// Oldest advertised subtask. Reservations for other workers are honoured until they expire.
    std::optional<Claim> claim_any(int worker, Micros now, Micros lease);
    /// Oldest subtask reserved for `worker`, else claim_any.
    std::optional<Claim> claim_designated(int worker, Micros now, Micros lease);

    /// Reserves an advertised subtask for `worker` until `until`.
    void designate(SubtaskId subtask, int worker, Micros until);

    /// First accepted completion per subtask wins. Throws ProtocolError for unknown subtasks or attempts.
    Ack complete(int worker, SubtaskId subtask, int attempt, exec::HistogramMap partial, Micros now);

    /// Re-advertises in-progress subtasks whose lease ended at or before `now`.
    std::vector<SubtaskId> expire_leases(Micros now);

    Snapshot aggregate(QueryId query, Micros now);
    /// Withdraws advertised subtasks; later completions are discarded. Idempotent.
    void cancel_query(QueryId query);

    bool has_advertised() const;
    std::size_t advertised_count() const;
    /// Advertised subtasks reserved for someone other than `worker` and not yet expired.
    std::optional<Micros> next_reservation_expiry(int worker, Micros now) const;

    QueryStatus status(QueryId query) const;
    std::vector<QueryStatus> queries() const;
    std::vector<Subtask> subtasks(QueryId query) const;
    std::vector<CompletionRecord> completion_log() const;

private:
    struct Query {
        QueryStatus status;
        std::shared_ptr<const exec::CompiledQuery> program;
        std::vector<exec::HistogramSpec> specs;
        std::vector<SubtaskId> subtasks;
    };
    struct Dataset {
        std::shared_ptr<const columnar::ColumnarDataset> data;
        std::vector<columnar::Partition> partitions;
    };

    Query &query_locked(QueryId id);
    const Query &query_locked(QueryId id) const;
    bool claimable_by(const Subtask &s, int worker, Micros now) const;
    Claim take(Subtask &s, int worker, Micros now, Micros lease);

    mutable std::mutex mu_;
    std::map<std::string, Dataset> datasets_;
    std::map<QueryId, Query> queries_;
    std::map<SubtaskId, Subtask> subtasks_;
    std::set<SubtaskId> advertised_;
    std::vector<CompletionRecord> log_;
    ResultStore results_;
    QueryId next_query_ = 1;
    SubtaskId next_subtask_ = 1;
};

}  // namespace flatq::sched
