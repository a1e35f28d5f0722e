#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace netrel {

// Worker count used when a caller passes 0: NETREL_THREADS if set, otherwise
// the hardware concurrency.
unsigned default_threads();

inline unsigned resolve_threads(unsigned requested) {
  return requested == 0 ? default_threads() : requested;
}

// Splits [0, n) into at most `threads` contiguous chunks and calls
// fn(chunk_index, begin, end) for each. Chunk boundaries depend only on n and
// the chunk count, so callers that write to per-index slots get results that
// are independent of scheduling.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  threads = resolve_threads(threads);
  const std::size_t chunks =
      std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
  if (chunks == 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> workers;
  workers.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    workers.emplace_back([&, c, begin, end] {
      try {
        fn(c, begin, end);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

}  // namespace netrel
