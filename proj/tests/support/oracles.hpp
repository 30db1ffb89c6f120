#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance suite. Nothing here calls into the code under test except to
// build the quantity being checked.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "renyi/autodiff.hpp"
#include "renyi/data.hpp"
#include "renyi/random.hpp"

namespace renyi::oracle {

using BuildLoss = std::function<ad::NodeId(ad::Tape&, const std::vector<ad::NodeId>& params)>;

struct GradCheck {
  double max_rel_error = 0.0;
  int coordinates = 0;
};

// Relative error with a small absolute floor, so coordinates whose true
// gradient is zero compare on an absolute scale.
inline double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

// Central differences (step h) at `samples` random coordinates spread over all
// parameters, or at every coordinate when samples <= 0.
inline GradCheck check_gradients(std::vector<ad::Tensor>& params, const BuildLoss& build, int samples = 0,
                                 std::uint64_t seed = 1, double h = 1e-5) {
  auto evaluate = [&](bool with_grads, ad::Gradients* grads, std::vector<ad::NodeId>* ids) {
    ad::Tape tape;
    std::vector<ad::NodeId> nodes;
    for (const auto& p : params) nodes.push_back(tape.parameter(p));
    const ad::NodeId loss = build(tape, nodes);
    if (with_grads) {
      *grads = tape.backward(loss);
      *ids = nodes;
    }
    return tape.scalar(loss);
  };
  ad::Gradients grads;
  std::vector<ad::NodeId> ids;
  evaluate(true, &grads, &ids);

  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (Eigen::Index k = 0; k < params[p].size(); ++k) coords.emplace_back(p, k);
  }
  if (samples > 0 && static_cast<std::size_t>(samples) < coords.size()) {
    CounterRng rng(seed);
    rng.shuffle(std::span(coords));
    coords.resize(static_cast<std::size_t>(samples));
  }
  GradCheck out;
  for (const auto& [p, k] : coords) {
    double& x = params[p].data()[k];
    const double saved = x;
    x = saved + h;
    const double up = evaluate(false, nullptr, nullptr);
    x = saved - h;
    const double down = evaluate(false, nullptr, nullptr);
    x = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double analytic = grads.at(ids[p]).data()[k];
    out.max_rel_error = std::max(out.max_rel_error, rel_error(analytic, numeric));
    ++out.coordinates;
  }
  return out;
}

inline ad::Tensor random_tensor(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double lo = -2.0,
                                double hi = 2.0) {
  CounterRng rng(seed);
  ad::Tensor t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

// n draws of a standard bivariate normal pair with correlation rho.
inline std::pair<SampleMatrix, SampleMatrix> gaussian_pair(std::size_t n, double rho, std::uint64_t seed) {
  CounterRng rng(seed);
  SampleMatrix u(static_cast<Eigen::Index>(n), 1), v(static_cast<Eigen::Index>(n), 1);
  const double c = std::sqrt(1.0 - rho * rho);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double a = rng.normal();
    const double b = rng.normal();
    u(i, 0) = a;
    v(i, 0) = rho * a + c * b;
  }
  return {u, v};
}

// Maximal correlation of a standard bivariate normal pair by direct
// discretization: cell probabilities of the true density on a bins x bins
// grid over [-6, 6]^2, Q = P / sqrt(p_u p_v), second singular value of Q
// computed with Eigen's own SVD.
inline double witsenhausen_gaussian(double rho, int bins = 128) {
  const double lo = -6.0, step = 12.0 / bins;
  const double det = 1.0 - rho * rho;
  Eigen::MatrixXd p(bins, bins);
  for (int i = 0; i < bins; ++i) {
    const double x = lo + (i + 0.5) * step;
    for (int j = 0; j < bins; ++j) {
      const double y = lo + (j + 0.5) * step;
      p(i, j) = std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * det));
    }
  }
  p /= p.sum();
  const Eigen::VectorXd pu = p.rowwise().sum();
  const Eigen::VectorXd pv = p.colwise().sum().transpose();
  Eigen::MatrixXd q(bins, bins);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) q(i, j) = p(i, j) / std::sqrt(pu(i) * pv(j));
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(q);
  return svd.singularValues()(1);
}

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace renyi::oracle
