#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace renyi {

// n observations x d features, column-major.
using SampleMatrix = Eigen::MatrixXd;

enum class Task { binary, regression, multiclass };

struct Dataset {
  SampleMatrix x;  // features
  SampleMatrix s;  // sensitive attribute(s)
  SampleMatrix y;  // target: one column of 0/1, reals, or class indices
  Task task = Task::binary;

  std::size_t rows() const { return static_cast<std::size_t>(x.rows()); }
  Dataset subset(std::span<const std::size_t> rows) const;
};

// Seeded 80/20-style split; `test_fraction` of rows go to the second element.
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

inline std::span<const double> column(const SampleMatrix& m, Eigen::Index c = 0) {
  return {m.data() + c * m.rows(), static_cast<std::size_t>(m.rows())};
}

inline SampleMatrix as_column(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// FNV-1a 64-bit; used for configuration fingerprints.
std::uint64_t fnv1a(std::string_view text);
std::string hex64(std::uint64_t value);

}  // namespace renyi
