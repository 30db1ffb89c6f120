#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"

namespace renyi::linalg {

namespace {

constexpr int kMaxSweeps = 60;

// Hestenes one-sided Jacobi on a tall matrix (rows >= cols).
SvdResult jacobi_tall(const Matrix& a) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  Matrix w = a;
  Matrix v = Matrix::Identity(n, n);
  const double tol = 4.0 * std::numeric_limits<double>::epsilon();

  int sweeps = 0;
  bool rotated = true;
  while (rotated) {
    if (sweeps == kMaxSweeps) {
      fail(ErrorKind::numeric, "Jacobi SVD did not converge in " +
                                   std::to_string(kMaxSweeps) + " sweeps");
    }
    ++sweeps;
    rotated = false;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double alpha = w.col(i).squaredNorm();
        const double beta = w.col(j).squaredNorm();
        const double gamma = w.col(i).dot(w.col(j));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index r = 0; r < m; ++r) {
          const double wi = w(r, i);
          const double wj = w(r, j);
          w(r, i) = c * wi - s * wj;
          w(r, j) = s * wi + c * wj;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const double vi = v(r, i);
          const double vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
  }

  Vector norms(n);
  for (Eigen::Index k = 0; k < n; ++k) norms(k) = w.col(k).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return norms(x) > norms(y); });

  SvdResult out;
  out.sweeps = sweeps;
  out.values.resize(n);
  out.u = Matrix::Zero(m, n);
  out.v.resize(n, n);
  const double cutoff = norms.size() > 0 ? norms.maxCoeff() * 1e-300 : 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values(k) = norms(src);
    out.v.col(k) = v.col(src);
    if (norms(src) > cutoff && norms(src) > 0.0) out.u.col(k) = w.col(src) / norms(src);
  }

  // Complete left vectors of zero singular values to an orthonormal set.
  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.u.col(k).squaredNorm() > 0.0) continue;
    for (Eigen::Index e = 0; e < m; ++e) {
      Vector cand = Vector::Unit(m, e);
      for (Eigen::Index p = 0; p < n; ++p) {
        if (p != k && out.u.col(p).squaredNorm() > 0.0) cand -= out.u.col(p).dot(cand) * out.u.col(p);
      }
      const double len = cand.norm();
      if (len > 1e-8) {
        out.u.col(k) = cand / len;
        break;
      }
    }
  }
  return out;
}

void fix_signs(SvdResult& r) {
  for (Eigen::Index k = 0; k < r.u.cols(); ++k) {
    Eigen::Index arg = 0;
    r.u.col(k).cwiseAbs().maxCoeff(&arg);
    if (r.u(arg, k) < 0.0) {
      r.u.col(k) *= -1.0;
      r.v.col(k) *= -1.0;
    }
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (!a.allFinite()) fail(ErrorKind::numeric, "svd: non-finite entries");
  SvdResult out;
  if (a.rows() >= a.cols()) {
    out = jacobi_tall(a);
  } else {
    SvdResult t = jacobi_tall(a.transpose());
    out.values = std::move(t.values);
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.sweeps = t.sweeps;
  }
  fix_signs(out);
  return out;
}

Matrix inverse_sqrt_psd(const Matrix& s, double ridge) {
  const Matrix shifted = s + ridge * Matrix::Identity(s.rows(), s.cols());
  const SvdResult r = svd(shifted);
  Vector inv(r.values.size());
  for (Eigen::Index k = 0; k < inv.size(); ++k) {
    inv(k) = r.values(k) > 0.0 ? 1.0 / std::sqrt(r.values(k)) : 0.0;
  }
  return r.v * inv.asDiagonal() * r.v.transpose();
}

}  // namespace renyi::linalg
