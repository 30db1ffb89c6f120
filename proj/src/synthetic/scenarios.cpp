#include <algorithm>
#include <cmath>
#include <numbers>

#include "renyi/error.hpp"
#include "renyi/metrics.hpp"
#include "renyi/random.hpp"
#include "renyi/synthetic.hpp"

namespace renyi::synthetic {

Dataset gen_toy(const ToyScenarioParams& params) {
  if (params.n < 1) fail(ErrorKind::invalid_argument, "toy scenario needs n >= 1");
  const auto n = static_cast<Eigen::Index>(params.n);
  CounterRng rng(params.seed);
  Dataset d;
  d.task = Task::binary;
  d.x.resize(n, 2);
  d.s.resize(n, 1);
  d.y.resize(n, 1);
  const double cross = std::sqrt(0.75);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool positive = rng.bernoulli(0.5);
    const double s = rng.normal();
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    d.s(i, 0) = s;
    d.y(i, 0) = positive ? 1.0 : 0.0;
    if (positive) {
      d.x(i, 0) = 1.0 + z1;
      d.x(i, 1) = 1.0 + 3.0 * std::sin(s) + z2;
    } else {
      // Cholesky factor of [[1, -1/2], [-1/2, 1]].
      d.x(i, 0) = z1;
      d.x(i, 1) = -0.5 * z1 + cross * z2;
    }
  }
  return d;
}

ArctanSample gen_arctan(const ArctanScenarioParams& params) {
  if (!(params.sigma > 0.0)) fail(ErrorKind::invalid_argument, "arctan scenario needs sigma > 0");
  const auto n = static_cast<Eigen::Index>(params.n);
  CounterRng rng(params.seed);
  ArctanSample out;
  out.x.resize(n);
  out.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = rng.normal(params.mu, params.sigma);
    const bool shift = rng.bernoulli(0.5);
    out.y(i) = y;
    out.x(i) = std::atan(y * y) + (shift ? std::numbers::pi : 0.0);
  }
  return out;
}

Eigen::VectorXd oracle_conditional_expectation(std::span<const double> x, double mu, double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "sigma must be > 0");
  Eigen::VectorXd out(static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = std::tan(x[i]);
    if (t < -1e-6) {
      fail(ErrorKind::invalid_argument, "x outside scenario support (tan(x) = " + std::to_string(t) + ")");
    }
    t = std::max(t, 0.0);
    const double r = std::sqrt(t);
    out(static_cast<Eigen::Index>(i)) = std::tanh(mu / (sigma * sigma) * r) * r;
  }
  return out;
}

Bounds oracle_simplified_hgr_bounds(double alpha) {
  const double damp = std::exp(-alpha * alpha / 2.0);
  return {std::sqrt(1.0 - damp), std::sqrt(1.0 - damp * std::pow(1.0 + alpha * alpha, -1.5))};
}

double oracle_mc_simplified_hgr(double alpha, std::size_t n_mc, std::uint64_t seed) {
  if (n_mc < 1000) fail(ErrorKind::invalid_argument, "Monte-Carlo oracle needs n_mc >= 1000");
  CounterRng rng(seed);
  std::vector<double> y(n_mc), cond(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    y[i] = rng.normal(alpha, 1.0);
    cond[i] = std::tanh(alpha * y[i]) * y[i];
  }
  // alpha = 0 makes E(Y|X) identically zero: no correlation to measure.
  if (std::all_of(cond.begin(), cond.end(), [](double c) { return c == 0.0; })) return 0.0;
  return metrics::pearson(cond, y);
}

Dataset gen_planted_symmetric_bias(const PlantedBiasParams& params) {
  if (params.n < 1) fail(ErrorKind::invalid_argument, "planted scenario needs n >= 1");
  const auto n = static_cast<Eigen::Index>(params.n);
  CounterRng rng(params.seed);
  Dataset d;
  d.task = Task::regression;
  d.x.resize(n, 2);
  d.s.resize(n, 1);
  d.y.resize(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = rng.normal();
    const bool shift = rng.bernoulli(0.5);
    const double x0 = rng.normal();
    const double bent = std::atan(s * s);
    d.s(i, 0) = s;
    d.x(i, 0) = x0;
    d.x(i, 1) = bent + (shift ? std::numbers::pi : 0.0);
    d.y(i, 0) = x0 + params.bias_scale * bent;
  }
  return d;
}

}  // namespace renyi::synthetic
