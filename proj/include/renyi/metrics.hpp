#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "renyi/data.hpp"

namespace renyi::metrics {

enum class Estimator { nn, kde, rdc, mine_mi, pearson_abs };

std::string to_string(Estimator e);
Estimator parse_estimator(std::string_view name);

struct HgrReport {
  double estimate = 0.0;      // clamped to [0, 1]; MINE reports nats >= 0
  double raw_estimate = 0.0;  // before clamping
  Estimator estimator = Estimator::nn;
  std::size_t n = 0;
  std::uint64_t config_fingerprint = 0;

  bool degenerate = false;   // a learned transform collapsed to a constant
  bool bins_merged = false;  // KDE: empty marginal bins were folded away
  bool ridge_added = false;  // RDC: projection covariance was rank-deficient
  double top_singular_value = 0.0;  // KDE: should be 1
};

struct HgrNnConfig {
  std::string f_arch = "FC:64 R, FC:64 R, FC:1";
  std::string g_arch = "FC:64 R, FC:64 R, FC:1";
  int epochs = 40;
  int batch_size = 512;
  double lr_f = 1e-3;
  double lr_g = 1e-3;
  std::uint64_t seed = 0;
  double epsilon = 1e-8;

  void validate() const;
  std::string canonical() const;
  std::uint64_t fingerprint() const;
};

double pearson(std::span<const double> u, std::span<const double> v);

// Neural maximal-correlation estimate: f and g are trained by Adam ascent on
// the batch mean of products of their standardized outputs; the reported value
// is that mean on the full sample after the last epoch.
HgrReport hgr_nn(const SampleMatrix& u, const SampleMatrix& v, const HgrNnConfig& cfg);

struct SimplifiedHgr {
  double estimate = 0.0;
  Eigen::VectorXd f_outputs;
  bool degenerate = false;
};

// hgr_nn with g fixed to the identity: approximates rho(E(V|U), V).
SimplifiedHgr hgr_nn_simplified(std::span<const double> u, std::span<const double> v,
                                const HgrNnConfig& cfg);

double silverman_bandwidth(std::span<const double> x);

// Second singular value of p(i,j) / sqrt(p_u(i) p_v(j)) on a KDE grid.
HgrReport hgr_kde(std::span<const double> u, std::span<const double> v, int bins = 32);

struct RdcSeeds {
  std::uint64_t u = 0;
  std::uint64_t v = 0;
};

// Randomized dependence coefficient: copula, random sine features, top CCA.
HgrReport hgr_rdc(const SampleMatrix& u, const SampleMatrix& v, int k, double s, RdcSeeds seeds);
HgrReport hgr_rdc(const SampleMatrix& u, const SampleMatrix& v, int k = 20, double s = 1.0 / 6.0,
                  std::uint64_t seed = 0);

// Donsker-Varadhan lower bound on mutual information (nats); the statistics
// network uses cfg.f_arch on the concatenated (u, v) input.
HgrReport mine_mi(const SampleMatrix& u, const SampleMatrix& v, const HgrNnConfig& cfg);

double fairquant(std::span<const double> y_hat, std::span<const double> s, int quantiles = 50);

// Column-wise empirical copula: rank / n, ties share the largest rank.
SampleMatrix copula(const SampleMatrix& x);

// Standardizes every column to mean 0, variance 1 (constant columns become 0).
SampleMatrix zscore(const SampleMatrix& x);

using DependenceFn = std::function<double(const SampleMatrix& u, const SampleMatrix& v)>;

// The `quantile` of `measure` over `shuffles` row permutations of v.
double permutation_null_quantile(const SampleMatrix& u, const SampleMatrix& v,
                                 const DependenceFn& measure, int shuffles, double quantile,
                                 std::uint64_t seed);

}  // namespace renyi::metrics
