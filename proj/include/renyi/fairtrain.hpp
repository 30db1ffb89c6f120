#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "renyi/data.hpp"
#include "renyi/metrics.hpp"
#include "renyi/nn.hpp"

namespace renyi::fair {

enum class Mode { hgr_representation, hgr_prediction, simple_adversary, mine_representation };
enum class Loss { mse, binary_cross_entropy, categorical_cross_entropy };

std::string to_string(Mode m);
std::string to_string(Loss l);
Mode parse_mode(std::string_view text);
Loss parse_loss(std::string_view text);

struct FairTrainConfig {
  double lambda = 13.0;
  int epochs = 200;
  int batch_size = 2048;
  Loss loss = Loss::binary_cross_entropy;
  double lr_f = 1e-3;
  double lr_g = 1e-3;
  double lr_phi = 1e-3;
  double lr_psi = 1e-3;
  std::uint64_t seed = 0;
  // Initialization stream of the adversary networks; defaults to `seed`.
  std::optional<std::uint64_t> adversary_seed;
  Mode mode = Mode::hgr_representation;
  double epsilon = 1e-8;

  std::string encoder_arch = "FC:16 R, FC:8 R, FC:2";
  std::string predictor_arch = "FC:16 R, FC:8 R, FC:4 R, FC:1 Sig";
  std::string adversary_arch = "FC:64 R, FC:64 R, FC:1";

  void validate() const;
};

// h (encoder), phi (predictor) and the adversary pair. In the HGR modes adv_f
// reads Z (or Y_hat) and adv_g reads S. The simple adversary regresses S on
// Y_hat with adv_f; the MINE adversary is a statistics network T(Z, S) in
// adv_f. adv_g is empty in those two modes.
struct FairModel {
  Mode mode = Mode::hgr_representation;
  nn::Mlp encoder;
  nn::Mlp predictor;
  nn::Mlp adv_f;
  nn::Mlp adv_g;

  SampleMatrix latent(const SampleMatrix& x) const;
  SampleMatrix predict(const SampleMatrix& x) const;
};

struct EpochRow {
  int epoch = 0;
  double predictor_loss = 0.0;  // mean L_Y over the epoch's batches
  double task_metric = 0.0;     // batch accuracy (classification) or MSE
  double adversary_objective = 0.0;  // mean batch J (or adversary loss / MI bound)
};

struct FinalMetrics {
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
  double accuracy = kMissing;
  double mse = kMissing;
  double hgr_nn_z = kMissing;
  double hgr_nn_yhat = kMissing;
  double hgr_kde = kMissing;
  double hgr_rdc = kMissing;
  double mine = kMissing;
  double fairquant = kMissing;

  // (name, value) in report column order.
  std::vector<std::pair<std::string, double>> named() const;
  static const std::vector<std::string>& names();
};

struct FairRunResult {
  std::vector<EpochRow> epochs;
  FinalMetrics final;
};

// Which final metrics evaluate() computes, and the estimator settings it uses.
struct EvalOptions {
  bool hgr_nn_z = true;
  bool hgr_nn_yhat = true;
  bool hgr_kde = true;
  bool hgr_rdc = true;
  bool mine = true;
  bool fairquant = true;
  metrics::HgrNnConfig estimator;
  int kde_bins = 32;
  int fairquant_quantiles = 50;
};

// Test instrumentation; production callers leave it empty.
struct TrainHooks {
  std::function<void(std::string_view)> trace;
  // Runs encoder and predictor updates only, with no adversary on the tape.
  bool skip_adversary = false;
};

struct TrainOutput {
  FairModel model;
  FairRunResult result;
};

// Fair representation learning: per batch, predictor descent on L_Y, then
// standardized adversary outputs, J, adversary ascent on J and encoder descent
// on L_Y + lambda J.
TrainOutput train_fair(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks = {});
// Same loop with the adversary f reading Y_hat instead of Z.
TrainOutput train_fair_prediction(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks = {});
// Adversary regresses S on Y_hat by least squares; the encoder maximizes its MSE.
TrainOutput train_simple_adversary(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks = {});
// MINE statistics network on (Z, S) as the adversary.
TrainOutput train_mine_representation(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks = {});
// Dispatches on cfg.mode.
TrainOutput train(const Dataset& train, const FairTrainConfig& cfg, const TrainHooks& hooks = {});

// Final metrics on held-out rows.
FinalMetrics evaluate(const FairModel& model, const Dataset& test, const EvalOptions& options);

// The scalar prediction column used by the 1-D fairness metrics.
Eigen::VectorXd prediction_column(const SampleMatrix& predictions, Task task);

}  // namespace renyi::fair
