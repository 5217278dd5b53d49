#ifndef PSHAPLEY_LRU_CACHE_HPP
#define PSHAPLEY_LRU_CACHE_HPP

#include <atomic>
#include <cstddef>
#include <future>
#include <list>
#include <mutex>
#include <unordered_map>
#include <utility>

namespace pshapley {

// Bounded map with atomic get-or-compute: concurrent callers asking for a key
// that is being computed wait on the first caller's result instead of
// recomputing it. Entries past `capacity` are evicted least recently used
// first; a capacity of 0 means unbounded.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class LruCache {
 public:
  explicit LruCache(std::size_t capacity = 0) : capacity_(capacity) {}

  LruCache(const LruCache&) = delete;
  LruCache& operator=(const LruCache&) = delete;

  template <typename Compute>
  Value get_or_compute(const Key& key, Compute&& compute) {
    std::promise<Value> promise;
    std::shared_future<Value> future;
    bool owner = false;
    {
      std::lock_guard lock(mutex_);
      if (auto it = index_.find(key); it != index_.end()) {
        order_.splice(order_.begin(), order_, it->second);
        future = it->second->second;
        hits_.fetch_add(1, std::memory_order_relaxed);
      } else {
        future = promise.get_future().share();
        order_.emplace_front(key, future);
        index_.emplace(key, order_.begin());
        evict_locked();
        misses_.fetch_add(1, std::memory_order_relaxed);
        owner = true;
      }
    }
    if (!owner) return future.get();
    try {
      promise.set_value(compute());
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::lock_guard lock(mutex_);
      if (auto it = index_.find(key); it != index_.end()) {
        order_.erase(it->second);
        index_.erase(it);
      }
    }
    return future.get();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return index_.size();
  }
  std::size_t capacity() const { return capacity_; }
  std::size_t hits() const { return hits_.load(); }
  std::size_t misses() const { return misses_.load(); }

  void clear() {
    std::lock_guard lock(mutex_);
    order_.clear();
    index_.clear();
  }

 private:
  using Entry = std::pair<Key, std::shared_future<Value>>;

  void evict_locked() {
    while (capacity_ != 0 && index_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;
  std::unordered_map<Key, typename std::list<Entry>::iterator, Hash> index_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

}  // namespace pshapley

#endif  // PSHAPLEY_LRU_CACHE_HPP
