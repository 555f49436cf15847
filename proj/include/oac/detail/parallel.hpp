#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace oac::detail {

// Splits [0, n) into at most `workers` contiguous chunks and runs
// fn(begin, end, chunkIndex) on each. A single chunk runs inline; with more,
// one thread per chunk. The first chunk exception is rethrown after the join,
// so callers see worker failures as ordinary errors.
template <typename Fn>
void parallelChunks(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
  if (chunks == 1) {
    fn(std::size_t{0}, n, std::size_t{0});
    return;
  }
  const std::size_t base = n / chunks;
  const std::size_t rem = n % chunks;
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  std::size_t begin = 0;
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = begin + base + (c < rem ? 1 : 0);
    threads.emplace_back([&fn, &errors, begin, end, c] {
      try {
        fn(begin, end, c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Runs fn(index) for every index in [0, n), distributing indices over at most
// `workers` threads. Convenience wrapper for per-partition loops.
template <typename Fn>
void parallelIndices(std::size_t n, unsigned workers, Fn&& fn) {
  parallelChunks(n, workers, [&fn](std::size_t b, std::size_t e, std::size_t) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace oac::detail
