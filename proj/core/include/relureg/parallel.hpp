#pragma once

#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

// Deterministic blocked reduction.  Sample-sum loops are split into fixed
// 8192-element blocks; each block is reduced sequentially and the per-block
// partials are combined in block order.  The result is bit-identical for every
// worker count, so RELU_REGRESS_THREADS only changes speed, never output.

namespace relureg {

inline constexpr std::size_t kReductionBlock = 8192;

inline unsigned reduction_threads() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("RELU_REGRESS_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) hw = static_cast<unsigned>(v);
  }
  return hw;
}

// Evaluates body(block_begin, block_end, block_index) for every block of
// [0, n).  Blocks may run on different threads; block indices are disjoint.
template <typename Body>
void for_each_block(std::size_t n, const Body& body) {
  if (n == 0) return;
  const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
  const unsigned nthreads = reduction_threads();
  if (nthreads <= 1 || nblocks == 1) {
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t lo = b * kReductionBlock;
      body(lo, std::min(n, lo + kReductionBlock), b);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      const std::size_t lo = b * kReductionBlock;
      body(lo, std::min(n, lo + kReductionBlock), b);
    }
  };
  std::vector<std::thread> pool;
  const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(nthreads, nblocks));
  pool.reserve(spawn);
  for (unsigned t = 0; t + 1 < spawn; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

// Scalar reduction: partial(lo, hi) must reduce the half-open range
// sequentially; partials are added in block order.
template <typename Partial>
double blocked_sum(std::size_t n, const Partial& partial) {
  if (n == 0) return 0.0;
  const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partials(nblocks);
  for_each_block(n, [&](std::size_t lo, std::size_t hi, std::size_t b) {
    partials[b] = partial(lo, hi);
  });
  double acc = 0.0;
  for (double p : partials) acc += p;
  return acc;
}

}  // namespace relureg
