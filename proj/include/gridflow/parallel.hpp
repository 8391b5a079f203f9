#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gridflow {

/// Half-open index range [begin, end).
struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
};

/// Block `b` of the contiguous split of [0, n) into `blocks` pieces of
/// ceil(n / blocks) elements; trailing blocks may be short or empty.
inline BlockRange block_range(std::size_t n, std::size_t blocks, std::size_t b) noexcept {
  const std::size_t width = blocks == 0 ? n : (n + blocks - 1) / blocks;
  const std::size_t begin = std::min(n, b * width);
  return {begin, std::min(n, begin + width)};
}

/// Calls fn(range, block) once for each of the `thread_count` blocks of
/// [0, n). Blocks run concurrently on up to `thread_count` workers; `fn` must
/// only write state owned by its block and must not throw.
template <typename Fn>
void for_each_block(std::size_t n, std::size_t thread_count, Fn&& fn) {
  const std::size_t blocks = std::max<std::size_t>(1, thread_count);
  if (blocks == 1) {
    fn(BlockRange{0, n}, std::size_t{0});
    return;
  }
#ifdef _OPENMP
#pragma omp parallel num_threads(static_cast<int>(blocks))
  {
    const auto team = static_cast<std::size_t>(omp_get_num_threads());
    for (auto b = static_cast<std::size_t>(omp_get_thread_num()); b < blocks; b += team) {
      fn(block_range(n, blocks, b), b);
    }
  }
#else
  for (std::size_t b = 0; b < blocks; ++b) fn(block_range(n, blocks, b), b);
#endif
}

/// Sum of partial(range) over the blocks of [0, n), reduced in block order so
/// the result depends only on `thread_count`, not on scheduling.
template <typename T, typename Fn>
T block_reduce(std::size_t n, std::size_t thread_count, Fn&& partial) {
  const std::size_t blocks = std::max<std::size_t>(1, thread_count);
  std::vector<T> parts(blocks, T{});
  for_each_block(n, blocks, [&](BlockRange r, std::size_t b) { parts[b] = partial(r); });
  T total{};
  for (const T& p : parts) total += p;
  return total;
}

}  // namespace gridflow
