#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace bicons::detail {

// Calls body(k) for k in [0, n), splitting the range into contiguous blocks. Each k
// writes only its own output, so results do not depend on the thread count.
template <typename Body>
void parallel_for(int n, int threads, Body&& body) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int k = 0; k < n; ++k) body(k);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int lo = int(long(n) * t / threads);
    const int hi = int(long(n) * (t + 1) / threads);
    pool.emplace_back([&, t, lo, hi] {
      try {
        for (int k = lo; k < hi; ++k) body(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace bicons::detail
