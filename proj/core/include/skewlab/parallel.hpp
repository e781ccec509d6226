#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace skewlab {

/// Fixed partition of [0, total) into batches. The plan depends only on
/// `total` and `batch_size`, so merged results never depend on thread count.
struct BatchPlan {
  std::size_t total = 0;
  std::size_t batch_size = 4096;
  unsigned threads = 1;

  std::size_t batches() const { return batch_size == 0 ? 0 : (total + batch_size - 1) / batch_size; }
};

/// Runs `work(batch_index, begin, end)` for every batch and returns the
/// per-batch results in batch order.
template <class Result, class Work>
std::vector<Result> run_batches(const BatchPlan& plan, Work&& work) {
  std::vector<Result> out(plan.batches());
  auto run_range = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < out.size(); b += stride) {
      const std::size_t begin = b * plan.batch_size;
      const std::size_t end = std::min(plan.total, begin + plan.batch_size);
      out[b] = work(b, begin, end);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(plan.threads, out.size()));
  if (threads <= 1) {
    run_range(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        run_range(t, threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace skewlab
