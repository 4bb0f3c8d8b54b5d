#ifndef SCALEBAYES_PARALLEL_HPP
#define SCALEBAYES_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace scalebayes {

// Worker count: explicit argument wins, then SCALE_BAYES_THREADS, then the
// hardware concurrency.
inline unsigned resolve_thread_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SCALE_BAYES_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Run fn(0..count-1) across a fixed pool. Tasks must write only to their own
// output slots; iteration order is unspecified, so results may not depend on
// scheduling.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
  threads = resolve_thread_count(threads);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n_workers = threads < count ? threads : static_cast<unsigned>(count);
  pool.reserve(n_workers);
  for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace scalebayes

#endif
