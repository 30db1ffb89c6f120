#include "renyi/data.hpp"

#include <cstdio>

#include "renyi/error.hpp"
#include "renyi/random.hpp"

namespace renyi {

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  Dataset out;
  out.x = x(idx, Eigen::all);
  out.s = s(idx, Eigen::all);
  out.y = y(idx, Eigen::all);
  out.task = task;
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorKind::invalid_argument, "test fraction must lie in (0, 1)");
  }
  const std::size_t n = data.rows();
  CounterRng rng(seed);
  const std::vector<std::size_t> perm = rng.permutation(n);
  const auto n_test = static_cast<std::size_t>(static_cast<double>(n) * test_fraction + 0.5);
  if (n_test == 0 || n_test == n) fail(ErrorKind::invalid_argument, "split leaves an empty side");
  const std::span<const std::size_t> all(perm);
  return {data.subset(all.subspan(n_test)), data.subset(all.first(n_test))};
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace renyi
