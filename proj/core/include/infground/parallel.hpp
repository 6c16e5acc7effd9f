#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace infground {

/// Resolves a requested thread count; 0 means all hardware threads.
unsigned resolve_threads(unsigned requested);

/// Runs `body(begin, end, block)` over fixed blocks of `[0, n)`.
///
/// Block boundaries depend only on `n` and `block_size`, never on the thread
/// count, so per-block partial results combined in block order are
/// bit-identical for any `threads`.
void for_each_block(std::size_t n, std::size_t block_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t block_count(std::size_t n, std::size_t block_size) {
  return (n + block_size - 1) / block_size;
}

/// Deterministic parallel sum: per-block partials added in block order.
double block_sum(std::size_t n, std::size_t block_size, unsigned threads,
                 const std::function<double(std::size_t, std::size_t)>& partial);

/// Deterministic parallel max (max is order independent).
double block_max(std::size_t n, std::size_t block_size, unsigned threads,
                 const std::function<double(std::size_t, std::size_t)>& partial);

}  // namespace infground
