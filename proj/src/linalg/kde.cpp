#include <algorithm>
#include <cmath>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"

namespace renyi::linalg {

namespace {

struct Axis {
  double lo = 0.0;
  double step = 0.0;
};

Axis make_axis(std::span<const double> x, int bins, double bw) {
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double lo = *mn - 3.0 * bw;
  const double hi = *mx + 3.0 * bw;
  return {lo, (hi - lo) / bins};
}

// kernel(i, k) = exp(-0.5 ((center_i - x_k) / bw)^2)
Matrix kernel_matrix(std::span<const double> x, const Axis& axis, int bins, double bw) {
  Matrix k(bins, static_cast<Eigen::Index>(x.size()));
  for (Eigen::Index j = 0; j < k.cols(); ++j) {
    const double xj = x[static_cast<std::size_t>(j)];
    for (int i = 0; i < bins; ++i) {
      const double z = (axis.lo + (i + 0.5) * axis.step - xj) / bw;
      k(i, j) = std::exp(-0.5 * z * z);
    }
  }
  return k;
}

}  // namespace

KdeGrid kde_density_grid(std::span<const double> u, std::span<const double> v, int bins,
                         double bw_u, double bw_v) {
  if (bins < 4) fail(ErrorKind::invalid_argument, "kde grid needs bins >= 4");
  if (!(bw_u > 0.0) || !(bw_v > 0.0)) fail(ErrorKind::invalid_argument, "kde bandwidths must be > 0");
  if (u.size() != v.size()) fail(ErrorKind::shape, "kde: columns differ in length");
  if (u.empty()) fail(ErrorKind::invalid_argument, "kde: empty sample");

  const Axis au = make_axis(u, bins, bw_u);
  const Axis av = make_axis(v, bins, bw_v);
  const Matrix ku = kernel_matrix(u, au, bins, bw_u);
  const Matrix kv = kernel_matrix(v, av, bins, bw_v);

  KdeGrid grid;
  grid.bins_u = bins;
  grid.bins_v = bins;
  grid.bandwidth_u = bw_u;
  grid.bandwidth_v = bw_v;
  grid.u_lo = au.lo;
  grid.u_step = au.step;
  grid.v_lo = av.lo;
  grid.v_step = av.step;
  grid.density = ku * kv.transpose();
  const double mass = grid.density.sum() * grid.cell_area();
  grid.density /= mass;
  return grid;
}

}  // namespace renyi::linalg
