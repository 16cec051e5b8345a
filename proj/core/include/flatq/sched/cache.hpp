#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <string>
#include <vector>

namespace flatq::sched {

struct PartitionKey {
    std::string dataset_id;
    int index = 0;

    std::string to_string() const { return dataset_id + "#" + std::to_string(index); }
    friend auto operator<=>(const PartitionKey &, const PartitionKey &) = default;
    friend bool operator==(const PartitionKey &, const PartitionKey &) = default;
};

/// Least-recently-used set of partitions bounded by total bytes.
class LruCache {
public:
    explicit LruCache(std::int64_t capacity_bytes);

    bool contains(const PartitionKey &key) const { return index_.count(key) != 0; }
    /// Marks `key` most recently used. No-op if absent.
    void touch(const PartitionKey &key);
    /**
     * Inserts after a completed load, evicting from the LRU end until it
     * fits. Items larger than the whole capacity are not cached. Returns
     * the evicted keys.
     */
    std::vector<PartitionKey> insert(const PartitionKey &key, std::int64_t bytes);
    void clear();

    std::int64_t capacity() const { return capacity_; }
    std::int64_t used_bytes() const { return used_; }
    std::size_t size() const { return order_.size(); }
    /// Most recently used first.
    std::vector<PartitionKey> keys() const;

private:
    struct Entry {
        PartitionKey key;
        std::int64_t bytes;
    };
    std::int64_t capacity_;
    std::int64_t used_ = 0;
    std::list<Entry> order_;
    std::map<PartitionKey, std::list<Entry>::iterator> index_;
};

}  // namespace flatq::sched
