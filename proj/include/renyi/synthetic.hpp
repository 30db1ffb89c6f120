#pragma once

#include <cstdint>
#include <span>
#include <utility>

#include "renyi/data.hpp"

namespace renyi::synthetic {

struct ToyScenarioParams {
  std::size_t n = 20000;
  std::uint64_t seed = 0;
};

// Binary target Y ~ B(1/2), sensitive S ~ N(0, 1), two features:
//   Y = 0: X ~ N((0, 0), [[1, -1/2], [-1/2, 1]])
//   Y = 1: X ~ N((1, 1 + 3 sin S), I)
Dataset gen_toy(const ToyScenarioParams& params);

struct ArctanScenarioParams {
  double mu = 0.0;
  double sigma = 1.0;
  std::size_t n = 5000;
  std::uint64_t seed = 0;

  double alpha() const { return mu / sigma; }
};

struct ArctanSample {
  Eigen::VectorXd x;  // arctan(y^2) + u * pi
  Eigen::VectorXd y;  // N(mu, sigma^2)
};

ArctanSample gen_arctan(const ArctanScenarioParams& params);

// E(Y | X) = tanh(mu / sigma^2 * sqrt(tan X)) * sqrt(tan X) for the arctan
// scenario. Throws if some tan(x) < -1e-6 (outside the scenario support).
Eigen::VectorXd oracle_conditional_expectation(std::span<const double> x, double mu, double sigma);

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

// sqrt(1 - e^(-a^2/2)) <= rho(E(Y|X), Y) <= sqrt(1 - e^(-a^2/2) (1 + a^2)^(-3/2))
Bounds oracle_simplified_hgr_bounds(double alpha);

// Monte-Carlo rho(tanh(alpha Y) Y, Y) with Y ~ N(alpha, 1).
double oracle_mc_simplified_hgr(double alpha, std::size_t n_mc, std::uint64_t seed);

struct PlantedBiasParams {
  std::size_t n = 10000;
  std::uint64_t seed = 0;
  double bias_scale = 2.0;
};

// Regression data whose target carries an even (symmetric) function of S:
//   S ~ N(0,1), U ~ B(1/2), x0 ~ N(0,1), x1 = arctan(S^2) + U pi,
//   y = x0 + bias_scale * arctan(S^2).
// E(S | anything built from x) is 0 by symmetry while the dependence is strong.
Dataset gen_planted_symmetric_bias(const PlantedBiasParams& params);

}  // namespace renyi::synthetic
