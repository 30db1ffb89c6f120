#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/metrics.hpp"
#include "renyi/random.hpp"

namespace renyi::metrics {

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::nn: return "nn";
    case Estimator::kde: return "kde";
    case Estimator::rdc: return "rdc";
    case Estimator::mine_mi: return "mine";
    case Estimator::pearson_abs: return "pearson";
  }
  return "?";
}

Estimator parse_estimator(std::string_view name) {
  if (name == "nn") return Estimator::nn;
  if (name == "kde") return Estimator::kde;
  if (name == "rdc") return Estimator::rdc;
  if (name == "mine") return Estimator::mine_mi;
  if (name == "pearson") return Estimator::pearson_abs;
  fail(ErrorKind::invalid_argument,
       "unknown estimator '" + std::string(name) + "' (expected nn, kde, rdc, mine or pearson)");
}

void HgrNnConfig::validate() const {
  if (epochs < 1) fail(ErrorKind::invalid_argument, "estimator epochs must be >= 1");
  if (batch_size < 2) fail(ErrorKind::invalid_argument, "estimator batch_size must be >= 2");
  if (!(lr_f > 0.0) || !(lr_g > 0.0)) fail(ErrorKind::invalid_argument, "learning rates must be > 0");
  if (!(epsilon >= 0.0)) fail(ErrorKind::invalid_argument, "epsilon must be >= 0");
}

std::string HgrNnConfig::canonical() const {
  std::ostringstream out;
  out.precision(17);
  out << "f_arch=" << f_arch << ";g_arch=" << g_arch << ";epochs=" << epochs
      << ";batch_size=" << batch_size << ";lr_f=" << lr_f << ";lr_g=" << lr_g
      << ";seed=" << seed << ";epsilon=" << epsilon;
  return out.str();
}

std::uint64_t HgrNnConfig::fingerprint() const { return fnv1a(canonical()); }

double pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) fail(ErrorKind::shape, "pearson: columns differ in length");
  if (u.size() < 2) fail(ErrorKind::invalid_argument, "pearson: need at least 2 samples");
  const double n = static_cast<double>(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / n;
  const double mv = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double suv = 0.0, suu = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double du = u[i] - mu;
    const double dv = v[i] - mv;
    suv += du * dv;
    suu += du * du;
    svv += dv * dv;
  }
  if (suu <= 0.0 || svv <= 0.0) fail(ErrorKind::numeric, "degenerate column");
  return std::clamp(suv / std::sqrt(suu * svv), -1.0, 1.0);
}

double fairquant(std::span<const double> y_hat, std::span<const double> s, int quantiles) {
  if (y_hat.size() != s.size()) fail(ErrorKind::shape, "fairquant: columns differ in length");
  const auto buckets = linalg::quantile_partition(s, quantiles);
  const double overall =
      std::accumulate(y_hat.begin(), y_hat.end(), 0.0) / static_cast<double>(y_hat.size());
  double total = 0.0;
  for (const auto& bucket : buckets) {
    double m = 0.0;
    for (std::size_t i : bucket) m += y_hat[i];
    m /= static_cast<double>(bucket.size());
    total += std::abs(m - overall);
  }
  return total / static_cast<double>(buckets.size());
}

SampleMatrix copula(const SampleMatrix& x) {
  const Eigen::Index n = x.rows();
  SampleMatrix out(n, x.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return x(a, c) < x(b, c); });
    Eigen::Index i = 0;
    while (i < n) {
      Eigen::Index j = i;
      while (j + 1 < n && x(order[static_cast<std::size_t>(j + 1)], c) == x(order[static_cast<std::size_t>(i)], c)) ++j;
      const double rank = static_cast<double>(j + 1) / static_cast<double>(n);
      for (Eigen::Index k = i; k <= j; ++k) out(order[static_cast<std::size_t>(k)], c) = rank;
      i = j + 1;
    }
  }
  return out;
}

SampleMatrix zscore(const SampleMatrix& x) {
  SampleMatrix out = x.rowwise() - x.colwise().mean();
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    const double sd = std::sqrt(out.col(c).squaredNorm() / n);
    if (sd > 0.0) {
      out.col(c) /= sd;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

double permutation_null_quantile(const SampleMatrix& u, const SampleMatrix& v,
                                 const DependenceFn& measure, int shuffles, double quantile,
                                 std::uint64_t seed) {
  if (shuffles < 1) fail(ErrorKind::invalid_argument, "need at least one shuffle");
  if (u.rows() != v.rows()) fail(ErrorKind::shape, "permutation null: row counts differ");
  CounterRng rng(seed);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(shuffles));
  for (int k = 0; k < shuffles; ++k) {
    const auto perm = rng.permutation(static_cast<std::size_t>(v.rows()));
    const std::vector<Eigen::Index> idx(perm.begin(), perm.end());
    const SampleMatrix shuffled = v(idx, Eigen::all);
    values.push_back(measure(u, shuffled));
  }
  std::sort(values.begin(), values.end());
  // Linear interpolation between order statistics.
  const double pos = std::clamp(quantile, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace renyi::metrics
