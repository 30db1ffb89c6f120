#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"
#include "renyi/metrics.hpp"

namespace renyi::metrics {

namespace {

// Cell masses below this fraction of the largest cell are floored to zero.
constexpr double kMassFloor = 1e-15;

double stddev(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double xi : x) ss += (xi - m) * (xi - m);
  return std::sqrt(ss / (n - 1.0));
}

linalg::Matrix drop_empty_rows(const linalg::Matrix& p, bool& dropped) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (p.row(i).sum() > 0.0) keep.push_back(i);
  }
  if (static_cast<Eigen::Index>(keep.size()) == p.rows()) return p;
  dropped = true;
  return p(keep, Eigen::all);
}

}  // namespace

double silverman_bandwidth(std::span<const double> x) {
  if (x.size() < 2) fail(ErrorKind::invalid_argument, "bandwidth needs at least 2 samples");
  return 1.06 * stddev(x) * std::pow(static_cast<double>(x.size()), -0.2);
}

HgrReport hgr_kde(std::span<const double> u, std::span<const double> v, int bins) {
  if (u.size() != v.size()) fail(ErrorKind::shape, "hgr_kde: columns differ in length");
  if (u.size() < 50) fail(ErrorKind::invalid_argument, "hgr_kde needs n >= 50");
  if (bins < 4) fail(ErrorKind::invalid_argument, "hgr_kde needs bins >= 4");

  // Evaluate in a canonical argument order so that swapping u and v runs the
  // exact same arithmetic.
  if (std::lexicographical_compare(v.begin(), v.end(), u.begin(), u.end())) std::swap(u, v);

  HgrReport report;
  report.estimator = Estimator::kde;
  report.n = u.size();
  std::ostringstream cfg;
  cfg << "kde;bins=" << bins << ";bandwidth=silverman";
  report.config_fingerprint = fnv1a(cfg.str());

  const double bw_u = silverman_bandwidth(u);
  const double bw_v = silverman_bandwidth(v);
  if (!(bw_u > 0.0) || !(bw_v > 0.0)) {
    report.degenerate = true;
    return report;
  }

  const linalg::KdeGrid grid = linalg::kde_density_grid(u, v, bins, bw_u, bw_v);
  linalg::Matrix mass = grid.density * grid.cell_area();
  const double floor = mass.maxCoeff() * kMassFloor;
  mass = (mass.array() < floor).select(0.0, mass);

  bool merged = false;
  mass = drop_empty_rows(mass, merged);
  mass = drop_empty_rows(mass.transpose(), merged).transpose();
  report.bins_merged = merged;
  mass /= mass.sum();

  const Eigen::VectorXd pu = mass.rowwise().sum();
  const Eigen::VectorXd pv = mass.colwise().sum().transpose();
  const Eigen::VectorXd su = pu.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd sv = pv.cwiseSqrt().cwiseInverse();
  const linalg::Matrix q = su.asDiagonal() * mass * sv.asDiagonal();

  const linalg::SvdResult r = linalg::svd(q);
  report.top_singular_value = r.values(0);
  report.raw_estimate = r.values.size() > 1 ? r.values(1) : 0.0;
  report.estimate = std::clamp(report.raw_estimate, 0.0, 1.0);
  return report;
}

}  // namespace renyi::metrics
