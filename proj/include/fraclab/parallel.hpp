#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fraclab {

namespace detail {
// Set inside worker threads so nested parallel calls run serially.
inline thread_local bool in_worker = false;
}  // namespace detail

/// Marks the current thread as a worker for its lifetime in scope.
class SerialScope {
 public:
  SerialScope() : saved_(detail::in_worker) { detail::in_worker = true; }
  ~SerialScope() { detail::in_worker = saved_; }
  SerialScope(const SerialScope&) = delete;
  SerialScope& operator=(const SerialScope&) = delete;

 private:
  bool saved_;
};

/// Worker count: FRACLAB_THREADS if set and positive, else the logical core count.
inline unsigned thread_count() {
  if (const char* env = std::getenv("FRACLAB_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(lo, hi) on contiguous chunks of [begin, end), one chunk per worker.
/// Exceptions thrown by workers are rethrown on the calling thread.
template <class Fn>
void parallel_chunks(std::size_t begin, std::size_t end, Fn&& fn) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  const std::size_t workers = detail::in_worker ? 1 : std::min<std::size_t>(thread_count(), n);
  if (workers <= 1) {
    fn(begin, end);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  const std::size_t step = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * step;
    const std::size_t hi = std::min(end, lo + step);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        SerialScope serial;
        fn(lo, hi);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace fraclab
