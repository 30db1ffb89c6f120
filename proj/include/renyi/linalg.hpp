#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace renyi::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SvdResult {
  Vector values;  // descending, nonnegative
  Matrix u;       // m x k
  Matrix v;       // n x k
  int sweeps = 0;
};

// Thin SVD by one-sided Jacobi rotations, k = min(m, n). The largest-magnitude
// entry of every left singular vector is made positive. Throws after 60 sweeps
// without convergence.
SvdResult svd(const Matrix& a);

// (s + ridge I)^(-1/2) for symmetric positive semi-definite s.
Matrix inverse_sqrt_psd(const Matrix& s, double ridge);

struct CcaResult {
  double correlation = 0.0;
  bool rank_deficient = false;  // a block covariance was numerically singular
};

// Largest canonical correlation between the column spaces of a and b.
CcaResult cca(const Matrix& a, const Matrix& b, double ridge);
double cca_top(const Matrix& a, const Matrix& b, double ridge = 1e-8);

struct KdeGrid {
  int bins_u = 0;
  int bins_v = 0;
  double bandwidth_u = 0.0;
  double bandwidth_v = 0.0;
  double u_lo = 0.0;
  double u_step = 0.0;
  double v_lo = 0.0;
  double v_step = 0.0;
  Matrix density;  // bins_u x bins_v, evaluated at cell centers

  double cell_area() const { return u_step * v_step; }
  double u_center(int i) const { return u_lo + (i + 0.5) * u_step; }
  double v_center(int j) const { return v_lo + (j + 0.5) * v_step; }
};

// Product-Gaussian KDE on a regular grid spanning [min - 3bw, max + 3bw] per
// axis, normalized so that sum(density) * cell_area == 1.
KdeGrid kde_density_grid(std::span<const double> u, std::span<const double> v, int bins,
                         double bw_u, double bw_v);

// Splits row indices into q equal-count buckets ordered by s. Bucket sizes
// differ by at most one (the first n % q buckets are larger); ties keep the
// original row order.
std::vector<std::vector<std::size_t>> quantile_partition(std::span<const double> s, int q);

}  // namespace renyi::linalg
