#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace layoutforge {

namespace detail {
inline thread_local bool in_parallel_region = false;
}  // namespace detail

// Worker cap: LAYOUTFORGE_WORKERS if set and positive, else hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("LAYOUTFORGE_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(begin, end) over contiguous chunks of [0, count). Chunk boundaries
// are multiples of `grain`. Nested calls from inside a worker run inline so
// that candidate-level and kernel-level parallelism do not multiply threads.
template <class Body>
void parallel_for_chunks(std::size_t count, std::size_t grain, Body&& body) {
  if (count == 0) return;
  grain = std::max<std::size_t>(grain, 1);
  const std::size_t chunks_total = (count + grain - 1) / grain;
  const std::size_t workers =
      detail::in_parallel_region ? 1 : std::min(worker_count(), chunks_total);
  if (workers <= 1) {
    body(std::size_t{0}, count);
    return;
  }

  const std::size_t per_worker = (chunks_total + workers - 1) / workers;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * per_worker * grain);
    const std::size_t end = std::min(count, (w + 1) * per_worker * grain);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end] {
      detail::in_parallel_region = true;
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  parallel_for_chunks(count, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) body(i);
  });
}

}  // namespace layoutforge
