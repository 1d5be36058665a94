#include "pfdg/types.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace pfdg {

int worker_threads() {
  static const int n = [] {
    if (const char* env = std::getenv("PFDG_THREADS")) {
      const int v = std::atoi(env);
      if (v >= 1) return v;
    }
    return 1;
  }();
  return n;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  const int nt = worker_threads();
  if (nt <= 1 || n <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int use = static_cast<int>(std::min<std::int64_t>(nt, n));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(use);
  for (int t = 0; t < use; ++t) {
    pool.emplace_back([&] {
      try {
        for (std::int64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pfdg
