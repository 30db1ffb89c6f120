#include <algorithm>
#include <numeric>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"

namespace renyi::linalg {

std::vector<std::vector<std::size_t>> quantile_partition(std::span<const double> s, int q) {
  if (q < 1) fail(ErrorKind::invalid_argument, "quantile count must be >= 1");
  const std::size_t n = s.size();
  if (static_cast<std::size_t>(q) > n) {
    fail(ErrorKind::invalid_argument, "quantile count " + std::to_string(q) +
                                          " exceeds sample size " + std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  const std::size_t base = n / static_cast<std::size_t>(q);
  const std::size_t extra = n % static_cast<std::size_t>(q);
  std::vector<std::vector<std::size_t>> buckets(static_cast<std::size_t>(q));
  std::size_t pos = 0;
  for (std::size_t b = 0; b < buckets.size(); ++b) {
    const std::size_t size = base + (b < extra ? 1 : 0);
    buckets[b].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                      order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return buckets;
}

}  // namespace renyi::linalg
