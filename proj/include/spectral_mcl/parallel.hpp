#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace spectral_mcl {

/// Worker count: hardware concurrency, capped by SPECTRAL_MCL_THREADS.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPECTRAL_MCL_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (...) {
      // unparsable value: keep the hardware default
    }
  }
  return n;
}

/// Calls fn(i) for i in [0, n) over contiguous chunks. fn must only write
/// state owned by index i; results are then independent of the split.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned workers = worker_count()) {
  constexpr std::size_t kMinChunk = 64;
  const std::size_t chunks = std::min<std::size_t>(workers, (n + kMinChunk - 1) / kMinChunk);
  if (chunks <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(chunks);
  const std::size_t per = (n + chunks - 1) / chunks;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = c * per, end = std::min(n, begin + per);
    pool.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
}

}  // namespace spectral_mcl
