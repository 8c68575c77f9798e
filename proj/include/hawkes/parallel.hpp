#pragma once

// Replica-parallel execution with per-replica RNG streams. Results are
// stored by replica index, so reductions over them do not depend on the
// thread count.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "hawkes/rng.hpp"

namespace hawkes {

// Thread cap: HAWKES_THREADS when set, otherwise the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("HAWKES_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <typename Fn>
auto run_replicas(std::size_t n, std::uint64_t master_seed, Fn&& fn, unsigned threads = 0) {
  using R = decltype(fn(std::size_t{0}, std::declval<Philox&>()));
  std::vector<R> out(n);
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

  auto body = [&](std::size_t r) {
    Philox rng = replica_stream(master_seed, r);
    out[r] = fn(r, rng);
  };

  if (threads <= 1) {
    for (std::size_t r = 0; r < n; ++r) body(r);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t r = next.fetch_add(1);
        if (r >= n) return;
        try {
          body(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next.store(n);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace hawkes
