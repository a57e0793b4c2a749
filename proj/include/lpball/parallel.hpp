#pragma once

// Reproducible parallel Monte Carlo. Work is cut into chunks whose layout
// depends only on the sample count; chunk k draws from RngStream(seed,
// stream_base + k) and partial results are merged in chunk order, so the
// result does not depend on the number of workers or on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include "lpball/rng.hpp"

namespace lpball {

struct ChunkPlan {
  std::uint64_t total = 0;
  std::uint64_t chunk_size = 256;

  [[nodiscard]] std::uint64_t chunks() const noexcept { return (total + chunk_size - 1) / chunk_size; }
  [[nodiscard]] std::uint64_t begin(std::uint64_t k) const noexcept { return k * chunk_size; }
  [[nodiscard]] std::uint64_t size(std::uint64_t k) const noexcept {
    return std::min(chunk_size, total - begin(k));
  }
};

/// At least `min_chunk` samples per chunk and at most `max_chunks` chunks.
inline ChunkPlan plan_chunks(std::uint64_t total, std::uint64_t min_chunk = 256, std::uint64_t max_chunks = 1024) {
  ChunkPlan plan;
  plan.total = total;
  plan.chunk_size = std::max<std::uint64_t>(min_chunk, (total + max_chunks - 1) / max_chunks);
  return plan;
}

/// Runs body(state, rng, first_index, count) over every chunk and folds the
/// per-chunk states with merge(into, from) in chunk order.
template <class Init, class Body, class Merge>
auto run_chunked(std::uint64_t seed, std::uint64_t stream_base, std::uint64_t total, unsigned workers, Init&& init,
                 Body&& body, Merge&& merge) {
  using State = decltype(init());
  const ChunkPlan plan = plan_chunks(total);
  const std::uint64_t nchunks = plan.chunks();
  std::vector<std::optional<State>> parts(nchunks);

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= nchunks) return;
      try {
        RngStream rng(seed, stream_base + k);
        State s = init();
        body(s, rng, plan.begin(k), plan.size(k));
        parts[k].emplace(std::move(s));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(nchunks);
        return;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(nchunks, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  State result = init();
  for (auto& part : parts) {
    if (part) merge(result, *part);
  }
  return result;
}

}  // namespace lpball
