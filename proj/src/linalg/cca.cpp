#include <algorithm>
#include <cmath>

#include "renyi/error.hpp"
#include "renyi/linalg.hpp"

namespace renyi::linalg {

namespace {

constexpr double kSingularRatio = 1e-12;

Matrix centered(const Matrix& x) { return x.rowwise() - x.colwise().mean(); }

bool nearly_singular(const Matrix& cov) {
  const Vector values = svd(cov).values;
  if (values.size() == 0) return true;
  const double top = values(0);
  return top <= 0.0 || values(values.size() - 1) <= kSingularRatio * top;
}

}  // namespace

CcaResult cca(const Matrix& a, const Matrix& b, double ridge) {
  if (a.rows() != b.rows()) {
    fail(ErrorKind::shape, "cca: row counts differ (" + std::to_string(a.rows()) + " vs " +
                               std::to_string(b.rows()) + ")");
  }
  if (ridge < 0.0) fail(ErrorKind::invalid_argument, "cca: ridge must be >= 0");
  if (a.rows() < 2) fail(ErrorKind::invalid_argument, "cca: need at least 2 rows");

  const double n = static_cast<double>(a.rows());
  const Matrix ac = centered(a);
  const Matrix bc = centered(b);
  const Matrix saa = ac.transpose() * ac / n;
  const Matrix sbb = bc.transpose() * bc / n;
  const Matrix sab = ac.transpose() * bc / n;

  CcaResult out;
  out.rank_deficient = nearly_singular(saa) || nearly_singular(sbb);
  if (out.rank_deficient && ridge == 0.0) {
    fail(ErrorKind::numeric, "cca: singular covariance block; use a positive ridge (e.g. 1e-8)");
  }

  const Matrix m = inverse_sqrt_psd(saa, ridge) * sab * inverse_sqrt_psd(sbb, ridge);
  const Vector values = svd(m).values;
  out.correlation = values.size() > 0 ? std::clamp(values(0), 0.0, 1.0) : 0.0;
  return out;
}

double cca_top(const Matrix& a, const Matrix& b, double ridge) { return cca(a, b, ridge).correlation; }

}  // namespace renyi::linalg
