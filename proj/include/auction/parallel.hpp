#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace auction {

// Worker count: AUCTION_THREADS when set, hardware concurrency otherwise.
inline int thread_count() {
  if (const char* env = std::getenv("AUCTION_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Index-parallel loop with a shared work counter. Results must be written to
// per-index slots so that output does not depend on the thread count.
template <class Body>
void parallel_for(long begin, long end, Body&& body) {
  const long total = end - begin;
  if (total <= 0) return;
  const int workers = static_cast<int>(std::min<long>(thread_count(), total));
  if (workers == 1) {
    for (long i = begin; i < end; ++i) body(i);
    return;
  }
  std::atomic<long> next(begin);
  std::vector<std::thread> pool;
  std::exception_ptr error = nullptr;
  std::atomic<bool> failed(false);
  const auto drain = [&]() {
    try {
      for (long i = next.fetch_add(1); i < end && !failed.load(); i = next.fetch_add(1))
        body(i);
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  pool.reserve(workers);
  for (int w = 1; w < workers; ++w) {
    try {
      pool.emplace_back(drain);
    } catch (const std::system_error&) {
      break;  // thread spawn failed: the calling thread picks up the slack
    }
  }
  drain();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace auction
