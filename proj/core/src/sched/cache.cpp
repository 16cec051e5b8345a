#include "flatq/sched/cache.hpp"

#include <stdexcept>

namespace flatq::sched {

LruCache::LruCache(std::int64_t capacity_bytes) : capacity_(capacity_bytes) {
    if (capacity_bytes < 0) throw std::invalid_argument("cache capacity must be non-negative");
}

void LruCache::touch(const PartitionKey &key) {
    auto it = index_.find(key);
    if (it != index_.end()) order_.splice(order_.begin(), order_, it->second);
}

std::vector<PartitionKey> LruCache::insert(const PartitionKey &key, std::int64_t bytes) {
    std::vector<PartitionKey> evicted;
    if (contains(key)) {
        touch(key);
        return evicted;
    }
    if (bytes > capacity_) return evicted;
    while (used_ + bytes > capacity_) {
        const Entry &victim = order_.back();
        evicted.push_back(victim.key);
        used_ -= victim.bytes;
        index_.erase(victim.key);
        order_.pop_back();
    }
    order_.push_front(Entry{key, bytes});
    index_[key] = order_.begin();
    used_ += bytes;
    return evicted;
}

void LruCache::clear() {
    order_.clear();
    index_.clear();
    used_ = 0;
}

std::vector<PartitionKey> LruCache::keys() const {
    std::vector<PartitionKey> out;
    for (const auto &e : order_) out.push_back(e.key);
    return out;
}

}  // namespace flatq::sched
