#include <cmath>
#include <sstream>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/metrics.hpp"
#include "renyi/random.hpp"

namespace renyi::metrics {

namespace {

constexpr double kRidge = 1e-8;

// sin([copula(x), 1] * W) with W ~ N(0, s^2), shape (d + 1) x k.
linalg::Matrix random_features(const SampleMatrix& x, int k, double s, std::uint64_t seed) {
  const SampleMatrix c = copula(x);
  linalg::Matrix augmented(c.rows(), c.cols() + 1);
  augmented << c, linalg::Matrix::Ones(c.rows(), 1);

  CounterRng rng(seed);
  linalg::Matrix w(augmented.cols(), k);
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.normal(0.0, s);
  }
  return (augmented * w).array().sin().matrix();
}

}  // namespace

HgrReport hgr_rdc(const SampleMatrix& u, const SampleMatrix& v, int k, double s, RdcSeeds seeds) {
  if (u.rows() != v.rows()) fail(ErrorKind::shape, "hgr_rdc: row counts differ");
  if (k < 1) fail(ErrorKind::invalid_argument, "hgr_rdc: k must be >= 1");
  if (!(s > 0.0)) fail(ErrorKind::invalid_argument, "hgr_rdc: s must be > 0");
  if (u.rows() <= 2 * k) {
    fail(ErrorKind::invalid_argument, "hgr_rdc needs n > 2k (n=" + std::to_string(u.rows()) +
                                          ", k=" + std::to_string(k) + ")");
  }

  const linalg::CcaResult cca =
      linalg::cca(random_features(u, k, s, seeds.u), random_features(v, k, s, seeds.v), kRidge);

  HgrReport report;
  report.estimator = Estimator::rdc;
  report.n = static_cast<std::size_t>(u.rows());
  std::ostringstream cfg;
  cfg.precision(17);
  cfg << "rdc;k=" << k << ";s=" << s << ";seed_u=" << seeds.u << ";seed_v=" << seeds.v;
  report.config_fingerprint = fnv1a(cfg.str());
  report.ridge_added = cca.rank_deficient;
  report.raw_estimate = cca.correlation;
  report.estimate = cca.correlation;
  return report;
}

HgrReport hgr_rdc(const SampleMatrix& u, const SampleMatrix& v, int k, double s, std::uint64_t seed) {
  return hgr_rdc(u, v, k, s, RdcSeeds{CounterRng::derive(seed, 1), CounterRng::derive(seed, 2)});
}

}  // namespace renyi::metrics
