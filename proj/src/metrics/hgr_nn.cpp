#include <algorithm>
#include <cmath>
#include <vector>

#include "renyi/error.hpp"
#include "renyi/metrics.hpp"
#include "renyi/nn.hpp"
#include "renyi/random.hpp"

namespace renyi::metrics {

namespace {

using nn::Direction;
using nn::Mlp;

enum StreamTag : std::uint64_t { kStreamF = 1, kStreamG = 2, kStreamBatches = 3, kStreamPairs = 4 };

// Below this variance a learned transform counts as constant.
constexpr double kDegenerateVariance = 1e-12;

void check_inputs(const SampleMatrix& u, const SampleMatrix& v, const HgrNnConfig& cfg) {
  cfg.validate();
  if (u.rows() != v.rows()) {
    fail(ErrorKind::shape, "u and v differ in row count (" + std::to_string(u.rows()) + " vs " +
                               std::to_string(v.rows()) + ")");
  }
  if (u.cols() < 1 || v.cols() < 1) fail(ErrorKind::shape, "u and v need at least one column");
  if (u.rows() < cfg.batch_size) {
    fail(ErrorKind::invalid_argument, "sample size " + std::to_string(u.rows()) +
                                          " is smaller than batch_size " +
                                          std::to_string(cfg.batch_size));
  }
  if (!u.allFinite() || !v.allFinite()) fail(ErrorKind::numeric, "non-finite sample values");
}

Mlp scalar_network(const std::string& arch_text, Eigen::Index input_dim, std::uint64_t seed) {
  const nn::Architecture arch = nn::parse_architecture(arch_text);
  if (arch.back().width != 1) fail(ErrorKind::config, "'" + arch_text + "' must end in a width-1 layer");
  return Mlp::init(arch, static_cast<int>(input_dim), seed);
}

std::vector<Eigen::Index> batch_rows(const std::vector<std::size_t>& perm, std::size_t start,
                                     std::size_t size) {
  return {perm.begin() + static_cast<std::ptrdiff_t>(start),
          perm.begin() + static_cast<std::ptrdiff_t>(start + size)};
}

struct FullSampleCorrelation {
  double value = 0.0;
  bool degenerate = false;
};

FullSampleCorrelation standardized_product_mean(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                                                double epsilon) {
  const double n = static_cast<double>(f.size());
  const Eigen::VectorXd fc = f.array() - f.mean();
  const Eigen::VectorXd gc = g.array() - g.mean();
  const double vf = fc.squaredNorm() / n;
  const double vg = gc.squaredNorm() / n;
  if (vf <= kDegenerateVariance || vg <= kDegenerateVariance) return {0.0, true};
  return {fc.dot(gc) / n / (std::sqrt(vf + epsilon) * std::sqrt(vg + epsilon)), false};
}

}  // namespace

HgrReport hgr_nn(const SampleMatrix& u, const SampleMatrix& v, const HgrNnConfig& cfg) {
  check_inputs(u, v, cfg);
  const SampleMatrix zu = zscore(u);
  const SampleMatrix zv = zscore(v);

  Mlp f = scalar_network(cfg.f_arch, zu.cols(), CounterRng::derive(cfg.seed, kStreamF));
  Mlp g = scalar_network(cfg.g_arch, zv.cols(), CounterRng::derive(cfg.seed, kStreamG));
  nn::AdamState opt_f(f, {.learning_rate = cfg.lr_f});
  nn::AdamState opt_g(g, {.learning_rate = cfg.lr_g});
  CounterRng batches(CounterRng::derive(cfg.seed, kStreamBatches));

  const auto n = static_cast<std::size_t>(zu.rows());
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> perm = batches.permutation(n);
    for (std::size_t start = 0; start + b <= n; start += b) {
      const auto rows = batch_rows(perm, start, b);
      ad::Tape tape;
      const auto fu = tape.standardize(f.forward(tape, tape.input(zu(rows, Eigen::all))), cfg.epsilon);
      const auto gv = tape.standardize(g.forward(tape, tape.input(zv(rows, Eigen::all))), cfg.epsilon);
      const auto objective = tape.mean(tape.mul(fu, gv));
      const ad::Gradients grads = tape.backward(objective);
      opt_f.step(f, grads, Direction::ascent);
      opt_g.step(g, grads, Direction::ascent);
    }
  }

  const auto corr = standardized_product_mean(f.predict(zu).col(0), g.predict(zv).col(0), cfg.epsilon);
  HgrReport report;
  report.estimator = Estimator::nn;
  report.n = n;
  report.config_fingerprint = cfg.fingerprint();
  report.degenerate = corr.degenerate;
  report.raw_estimate = corr.value;
  report.estimate = std::clamp(corr.value, 0.0, 1.0);
  return report;
}

SimplifiedHgr hgr_nn_simplified(std::span<const double> u, std::span<const double> v,
                                const HgrNnConfig& cfg) {
  const SampleMatrix um = as_column(u);
  const SampleMatrix vm = as_column(v);
  check_inputs(um, vm, cfg);
  const SampleMatrix zu = zscore(um);
  const SampleMatrix zv = zscore(vm);

  Mlp f = scalar_network(cfg.f_arch, 1, CounterRng::derive(cfg.seed, kStreamF));
  nn::AdamState opt_f(f, {.learning_rate = cfg.lr_f});
  CounterRng batches(CounterRng::derive(cfg.seed, kStreamBatches));

  const auto n = static_cast<std::size_t>(zu.rows());
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> perm = batches.permutation(n);
    for (std::size_t start = 0; start + b <= n; start += b) {
      const auto rows = batch_rows(perm, start, b);
      ad::Tape tape;
      const auto fu = tape.standardize(f.forward(tape, tape.input(zu(rows, Eigen::all))), cfg.epsilon);
      const auto gv = tape.standardize(tape.input(zv(rows, Eigen::all)), cfg.epsilon);
      const ad::Gradients grads = tape.backward(tape.mean(tape.mul(fu, gv)));
      opt_f.step(f, grads, Direction::ascent);
    }
  }

  SimplifiedHgr out;
  out.f_outputs = f.predict(zu).col(0);
  const auto corr = standardized_product_mean(out.f_outputs, zv.col(0), cfg.epsilon);
  out.degenerate = corr.degenerate;
  out.estimate = std::clamp(corr.value, 0.0, 1.0);
  return out;
}

HgrReport mine_mi(const SampleMatrix& u, const SampleMatrix& v, const HgrNnConfig& cfg) {
  check_inputs(u, v, cfg);
  const SampleMatrix zu = zscore(u);
  const SampleMatrix zv = zscore(v);

  Mlp t = scalar_network(cfg.f_arch, zu.cols() + zv.cols(), CounterRng::derive(cfg.seed, kStreamF));
  nn::AdamState opt(t, {.learning_rate = cfg.lr_f});
  CounterRng batches(CounterRng::derive(cfg.seed, kStreamBatches));
  CounterRng pairs(CounterRng::derive(cfg.seed, kStreamPairs));

  auto bound = [&](ad::Tape& tape, const SampleMatrix& a, const SampleMatrix& joint_v,
                   const SampleMatrix& marginal_v) {
    const auto ua = tape.input(a);
    const auto joint = t.forward(tape, tape.concat_cols(ua, tape.input(joint_v)));
    const auto marginal = t.forward(tape, tape.concat_cols(ua, tape.input(marginal_v)));
    return tape.sub(tape.mean(joint), tape.log_mean_exp(marginal));
  };

  const auto n = static_cast<std::size_t>(zu.rows());
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> perm = batches.permutation(n);
    const std::vector<std::size_t> other = pairs.permutation(n);
    for (std::size_t start = 0; start + b <= n; start += b) {
      const auto rows = batch_rows(perm, start, b);
      const auto mismatched = batch_rows(other, start, b);
      ad::Tape tape;
      const auto objective =
          bound(tape, zu(rows, Eigen::all), zv(rows, Eigen::all), zv(mismatched, Eigen::all));
      const ad::Gradients grads = tape.backward(objective);
      opt.step(t, grads, Direction::ascent);
    }
  }

  const std::vector<std::size_t> final_perm = pairs.permutation(n);
  const std::vector<Eigen::Index> shuffled(final_perm.begin(), final_perm.end());
  ad::Tape tape;
  const double value = tape.scalar(bound(tape, zu, zv, zv(shuffled, Eigen::all)));
  if (!std::isfinite(value)) fail(ErrorKind::numeric, "MINE bound is not finite");

  HgrReport report;
  report.estimator = Estimator::mine_mi;
  report.n = n;
  report.config_fingerprint = cfg.fingerprint();
  report.raw_estimate = value;
  report.estimate = std::max(0.0, value);
  return report;
}

}  // namespace renyi::metrics
