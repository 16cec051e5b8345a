#include "flatq/sched/coordinator.hpp"

#include <algorithm>

namespace flatq::sched {

std::string_view to_string(SubtaskState s) {
    switch (s) {
    case SubtaskState::Advertised: return "advertised";
    case SubtaskState::InProgress: return "in-progress";
    case SubtaskState::Done: return "done";
    case SubtaskState::Withdrawn: return "withdrawn";
    }
    return "?";
}

std::string_view to_string(Ack a) {
    switch (a) {
    case Ack::Accepted: return "accepted";
    case Ack::Duplicate: return "duplicate";
    case Ack::Cancelled: return "cancelled";
    }
    return "?";
}

bool ResultStore::put_partial(QueryId query, SubtaskId subtask, exec::HistogramMap partial) {
    return partials_.emplace(std::make_pair(query, subtask), std::move(partial)).second;
}

std::vector<std::pair<SubtaskId, const exec::HistogramMap *>> ResultStore::scan_partials(QueryId query) const {
    std::vector<std::pair<SubtaskId, const exec::HistogramMap *>> out;
    for (auto it = partials_.lower_bound({query, 0}); it != partials_.end() && it->first.first == query; ++it)
        out.emplace_back(it->first.second, &it->second);
    return out;
}

void ResultStore::drop_query(QueryId query) {
    partials_.erase(partials_.lower_bound({query, 0}), partials_.lower_bound({query + 1, 0}));
    snapshots_.erase(query);
}

void ResultStore::put_snapshot(QueryId query, Snapshot snapshot) { snapshots_[query] = std::move(snapshot); }

const Snapshot *ResultStore::last_snapshot(QueryId query) const {
    auto it = snapshots_.find(query);
    return it == snapshots_.end() ? nullptr : &it->second;
}

void Coordinator::register_dataset(const std::string &id, std::shared_ptr<const columnar::ColumnarDataset> dataset,
                                   int num_partitions) {
    std::lock_guard lock(mu_);
    if (!dataset) throw std::invalid_argument("dataset must not be null");
    if (num_partitions < 1) throw std::invalid_argument("a dataset needs at least one partition");
    if (datasets_.count(id)) throw std::invalid_argument("dataset '" + id + "' is already registered");
    auto parts = columnar::make_partitions(*dataset, id, num_partitions);
    datasets_.emplace(id, Dataset{std::move(dataset), std::move(parts)});
}

const std::vector<columnar::Partition> &Coordinator::partitions(const std::string &dataset_id) const {
    std::lock_guard lock(mu_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) throw std::out_of_range("unknown dataset '" + dataset_id + "'");
    return it->second.partitions;
}

std::shared_ptr<const columnar::ColumnarDataset> Coordinator::dataset(const std::string &dataset_id) const {
    std::lock_guard lock(mu_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) throw std::out_of_range("unknown dataset '" + dataset_id + "'");
    return it->second.data;
}

QueryId Coordinator::submit_query(const std::string &source, const std::string &dataset_id,
                                  std::vector<exec::HistogramSpec> specs, int num_partitions, Micros now) {
    std::shared_ptr<const columnar::ColumnarDataset> data;
    std::vector<columnar::Partition> parts;
    {
        std::lock_guard lock(mu_);
        auto it = datasets_.find(dataset_id);
        if (it == datasets_.end()) throw std::out_of_range("unknown dataset '" + dataset_id + "'");
        data = it->second.data;
        parts = it->second.partitions;
    }
    if (num_partitions != 0 && num_partitions != static_cast<int>(parts.size()))
        throw std::invalid_argument("dataset '" + dataset_id + "' is registered with " + std::to_string(parts.size()) +
                                    " partitions, not " + std::to_string(num_partitions));
    // Compile outside the lock; errors leave the board untouched.
    auto program = std::make_shared<const exec::CompiledQuery>(exec::compile_query(source, data->schema(), specs));

    std::lock_guard lock(mu_);
    QueryId qid = next_query_++;
    Query q{QueryStatus{qid, dataset_id, static_cast<int>(parts.size()), 0, false, now, std::nullopt}, std::move(program),
            std::move(specs), {}};
    for (const auto &p : parts) {
        SubtaskId sid = next_subtask_++;
        Subtask s;
        s.id = sid;
        s.query = qid;
        s.partition = p;
        subtasks_.emplace(sid, s);
        advertised_.insert(sid);
        q.subtasks.push_back(sid);
    }
    queries_.emplace(qid, std::move(q));
    return qid;
}

Coordinator::Query &Coordinator::query_locked(QueryId id) {
    auto it = queries_.find(id);
    if (it == queries_.end()) throw ProtocolError("unknown query " + std::to_string(id));
    return it->second;
}

const Coordinator::Query &Coordinator::query_locked(QueryId id) const {
    auto it = queries_.find(id);
    if (it == queries_.end()) throw ProtocolError("unknown query " + std::to_string(id));
    return it->second;
}

bool Coordinator::claimable_by(const Subtask &s, int worker, Micros now) const {
    return s.state == SubtaskState::Advertised && (s.designated < 0 || s.designated == worker || s.reserved_until <= now);
}

Claim Coordinator::take(Subtask &s, int worker, Micros now, Micros lease) {
    s.state = SubtaskState::InProgress;
    s.attempt += 1;
    s.worker = worker;
    s.lease_expiry = now + lease;
    advertised_.erase(s.id);
    return Claim{s.id, s.query, s.attempt, s.partition, s.lease_expiry, queries_.at(s.query).program};
}

std::optional<Claim> Coordinator::claim_local(int worker, const std::set<PartitionKey> &cached, Micros now,
                                              Micros lease) {
    std::lock_guard lock(mu_);
    for (SubtaskId id : advertised_) {
        Subtask &s = subtasks_.at(id);
        if (claimable_by(s, worker, now) && cached.count(s.key())) return take(s, worker, now, lease);
    }
    return std::nullopt;
}

std::optional<Claim> Coordinator::claim_any(int worker, Micros now, Micros lease) {
    std::lock_guard lock(mu_);
    for (SubtaskId id : advertised_) {
        Subtask &s = subtasks_.at(id);
        if (claimable_by(s, worker, now)) return take(s, worker, now, lease);
    }
    return std::nullopt;
}

std::optional<Claim> Coordinator::claim_designated(int worker, Micros now, Micros lease) {
    {
        std::lock_guard lock(mu_);
        for (SubtaskId id : advertised_) {
            Subtask &s = subtasks_.at(id);
            if (s.designated == worker) return take(s, worker, now, lease);
        }
    }
    return claim_any(worker, now, lease);
}

void Coordinator::designate(SubtaskId subtask, int worker, Micros until) {
    std::lock_guard lock(mu_);
    auto it = subtasks_.find(subtask);
    if (it == subtasks_.end()) throw ProtocolError("unknown subtask " + std::to_string(subtask));
    if (it->second.state != SubtaskState::Advertised) return;
    it->second.designated = worker;
    it->second.reserved_until = until;
}

Ack Coordinator::complete(int worker, SubtaskId subtask, int attempt, exec::HistogramMap partial, Micros now) {
    std::lock_guard lock(mu_);
    auto it = subtasks_.find(subtask);
    if (it == subtasks_.end()) throw ProtocolError("unknown subtask " + std::to_string(subtask));
    Subtask &s = it->second;
    if (attempt < 1 || attempt > s.attempt)
        throw ProtocolError("subtask " + std::to_string(subtask) + " has no attempt " + std::to_string(attempt));
    Query &q = query_locked(s.query);

    Ack ack;
    if (q.status.cancelled) {
        ack = Ack::Cancelled;
    } else if (s.state == SubtaskState::Done) {
        ack = Ack::Duplicate;
    } else {
        auto expected = exec::make_histograms(q.specs);
        bool shape_ok = partial.size() == expected.size() &&
                        std::all_of(partial.begin(), partial.end(), [&](const auto &kv) {
                            auto e = expected.find(kv.first);
                            return e != expected.end() && e->second.spec() == kv.second.spec();
                        });
        if (!shape_ok) throw ProtocolError("partial result does not match the query's histograms");
        ack = Ack::Accepted;
        s.state = SubtaskState::Done;
        s.worker = worker;
        advertised_.erase(s.id);
        results_.put_partial(s.query, s.id, std::move(partial));
        if (++q.status.done == q.status.total) q.status.completed_at = now;
    }
    log_.push_back(CompletionRecord{subtask, s.query, worker, attempt, now, ack});
    return ack;
}

std::vector<SubtaskId> Coordinator::expire_leases(Micros now) {
    std::lock_guard lock(mu_);
    std::vector<SubtaskId> out;
    for (auto &[id, s] : subtasks_) {
        if (s.state != SubtaskState::InProgress || s.lease_expiry > now) continue;
        if (queries_.at(s.query).status.cancelled) {
            s.state = SubtaskState::Withdrawn;
            continue;
        }
        s.state = SubtaskState::Advertised;
        s.worker = -1;
        s.designated = -1;
        advertised_.insert(id);
        out.push_back(id);
    }
    return out;
}

Snapshot Coordinator::aggregate(QueryId query, Micros now) {
    std::lock_guard lock(mu_);
    Query &q = query_locked(query);
    Snapshot snap;
    snap.histograms = exec::make_histograms(q.specs);
    for (const auto &[sid, partial] : results_.scan_partials(query)) snap.histograms = exec::merge(snap.histograms, *partial);
    snap.done = q.status.done;
    snap.total = q.status.total;
    snap.fraction = static_cast<double>(snap.done) / static_cast<double>(snap.total);
    snap.taken_at = now;
    results_.put_snapshot(query, snap);
    return snap;
}

void Coordinator::cancel_query(QueryId query) {
    std::lock_guard lock(mu_);
    Query &q = query_locked(query);
    if (q.status.cancelled) return;
    q.status.cancelled = true;
    for (SubtaskId id : q.subtasks) {
        Subtask &s = subtasks_.at(id);
        if (s.state == SubtaskState::Advertised) {
            s.state = SubtaskState::Withdrawn;
            advertised_.erase(id);
        }
    }
}

bool Coordinator::has_advertised() const {
    std::lock_guard lock(mu_);
    return !advertised_.empty();
}

std::size_t Coordinator::advertised_count() const {
    std::lock_guard lock(mu_);
    return advertised_.size();
}

std::optional<Micros> Coordinator::next_reservation_expiry(int worker, Micros now) const {
    std::lock_guard lock(mu_);
    std::optional<Micros> best;
    for (SubtaskId id : advertised_) {
        const Subtask &s = subtasks_.at(id);
        if (s.designated >= 0 && s.designated != worker && s.reserved_until > now)
            best = best ? std::min(*best, s.reserved_until) : s.reserved_until;
    }
    return best;
}

QueryStatus Coordinator::status(QueryId query) const {
    std::lock_guard lock(mu_);
    return query_locked(query).status;
}

std::vector<QueryStatus> Coordinator::queries() const {
    std::lock_guard lock(mu_);
    std::vector<QueryStatus> out;
    for (const auto &kv : queries_) out.push_back(kv.second.status);
    return out;
}

std::vector<Subtask> Coordinator::subtasks(QueryId query) const {
    std::lock_guard lock(mu_);
    std::vector<Subtask> out;
    for (SubtaskId id : query_locked(query).subtasks) out.push_back(subtasks_.at(id));
    return out;
}

std::vector<CompletionRecord> Coordinator::completion_log() const {
    std::lock_guard lock(mu_);
    return log_;
}

}  // namespace flatq::sched
