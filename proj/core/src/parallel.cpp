#include "infground/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <thread>

namespace infground {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

void for_each_block(std::size_t n, std::size_t block_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  const std::size_t blocks = block_count(n, block_size);
  if (blocks == 0) return;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), blocks));
  auto run_block = [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    body(begin, std::min(n, begin + block_size), b);
  };
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) run_block(b);
    });
  }
  for (auto& t : pool) t.join();
}

double block_sum(std::size_t n, std::size_t block_size, unsigned threads,
                 const std::function<double(std::size_t, std::size_t)>& partial) {
  std::vector<double> parts(block_count(n, block_size), 0.0);
  for_each_block(n, block_size, threads, [&](std::size_t begin, std::size_t end, std::size_t b) {
    parts[b] = partial(begin, end);
  });
  double total = 0.0;
  for (double v : parts) total += v;
  return total;
}

double block_max(std::size_t n, std::size_t block_size, unsigned threads,
                 const std::function<double(std::size_t, std::size_t)>& partial) {
  std::vector<double> parts(block_count(n, block_size), -std::numeric_limits<double>::infinity());
  for_each_block(n, block_size, threads, [&](std::size_t begin, std::size_t end, std::size_t b) {
    parts[b] = partial(begin, end);
  });
  double best = -std::numeric_limits<double>::infinity();
  for (double v : parts) best = std::max(best, v);
  return best;
}

}  // namespace infground
