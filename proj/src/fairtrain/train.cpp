#include <cmath>
#include <sstream>

#include "renyi/error.hpp"
#include "renyi/fairtrain.hpp"
#include "renyi/random.hpp"

namespace renyi::fair {

namespace {

using ad::NodeId;
using ad::Tape;
using nn::Direction;
using nn::Mlp;

enum StreamTag : std::uint64_t {
  kStreamEncoder = 11,
  kStreamPredictor = 12,
  kStreamAdvF = 13,
  kStreamAdvG = 14,
  kStreamBatches = 15,
  kStreamPairs = 16,
};

Mlp build(const std::string& arch, Eigen::Index input_dim, std::uint64_t seed) {
  return Mlp::init(nn::parse_architecture(arch), static_cast<int>(input_dim), seed);
}

SampleMatrix one_hot(const SampleMatrix& labels, int classes) {
  SampleMatrix out = SampleMatrix::Zero(labels.rows(), classes);
  for (Eigen::Index i = 0; i < labels.rows(); ++i) {
    const auto c = static_cast<Eigen::Index>(std::llround(labels(i, 0)));
    if (c < 0 || c >= classes) {
      fail(ErrorKind::invalid_argument, "class label " + std::to_string(c) + " out of range for " +
                                            std::to_string(classes) + " outputs");
    }
    out(i, c) = 1.0;
  }
  return out;
}

// Gradients of `model` scaled and summed: a + factor * b.
ad::Gradients combine(const Mlp& model, const ad::Gradients& a, const ad::Gradients& b, double factor) {
  ad::Gradients out;
  std::size_t key = 0;
  for (const nn::Layer& layer : model.layers()) {
    for (const ad::Tensor* p : {&layer.weight, &layer.bias}) {
      const ad::Tensor* ga = a.find(*p);
      const ad::Tensor* gb = b.find(*p);
      if (ga == nullptr || gb == nullptr) fail(ErrorKind::run, "encoder gradient missing");
      out.insert(ad::NodeId{key++}, p, *ga + factor * *gb);
    }
  }
  return out;
}

class Trainer {
 public:
  Trainer(const Dataset& data, const FairTrainConfig& cfg, const TrainHooks& hooks)
      : data_(data), cfg_(cfg), hooks_(hooks), batches_(CounterRng::derive(cfg.seed, kStreamBatches)),
        pairs_(CounterRng::derive(cfg.seed, kStreamPairs)) {
    cfg_.validate();
    if (data.rows() < static_cast<std::size_t>(cfg.batch_size)) {
      fail(ErrorKind::invalid_argument, "training rows (" + std::to_string(data.rows()) +
                                            ") fewer than batch_size (" +
                                            std::to_string(cfg.batch_size) + ")");
    }
    if (data.s.rows() != data.x.rows() || data.y.rows() != data.x.rows()) {
      fail(ErrorKind::shape, "x, s and y differ in row count");
    }
    const std::uint64_t adv_seed = cfg.adversary_seed.value_or(cfg.seed);
    model_.mode = cfg.mode;
    model_.encoder = build(cfg.encoder_arch, data.x.cols(), CounterRng::derive(cfg.seed, kStreamEncoder));
    model_.predictor = build(cfg.predictor_arch, model_.encoder.output_dim(),
                             CounterRng::derive(cfg.seed, kStreamPredictor));
    check_loss_matches_head();
    if (cfg.loss == Loss::categorical_cross_entropy) {
      targets_ = one_hot(data.y, model_.predictor.output_dim());
    } else {
      targets_ = data.y;
    }

    const Eigen::Index latent = model_.encoder.output_dim();
    const Eigen::Index sens = data.s.cols();
    const Eigen::Index pred = model_.predictor.output_dim();
    const std::uint64_t f_seed = CounterRng::derive(adv_seed, kStreamAdvF);
    const std::uint64_t g_seed = CounterRng::derive(adv_seed, kStreamAdvG);
    switch (cfg.mode) {
      case Mode::hgr_representation:
        model_.adv_f = build(cfg.adversary_arch, latent, f_seed);
        model_.adv_g = build(cfg.adversary_arch, sens, g_seed);
        break;
      case Mode::hgr_prediction:
        model_.adv_f = build(cfg.adversary_arch, pred, f_seed);
        model_.adv_g = build(cfg.adversary_arch, sens, g_seed);
        break;
      case Mode::simple_adversary: {
        nn::Architecture arch = nn::parse_architecture(cfg.adversary_arch);
        arch.back() = {static_cast<int>(sens), ad::Activation::identity};
        model_.adv_f = Mlp::init(arch, static_cast<int>(pred), f_seed);
        break;
      }
      case Mode::mine_representation:
        model_.adv_f = build(cfg.adversary_arch, latent + sens, f_seed);
        break;
    }
    if (cfg.mode == Mode::hgr_representation || cfg.mode == Mode::hgr_prediction ||
        cfg.mode == Mode::mine_representation) {
      if (model_.adv_f.output_dim() != 1) fail(ErrorKind::config, "adversary networks must end in FC:1");
    }

    opt_encoder_ = nn::AdamState(model_.encoder, {.learning_rate = cfg.lr_psi});
    opt_predictor_ = nn::AdamState(model_.predictor, {.learning_rate = cfg.lr_phi});
    opt_f_ = nn::AdamState(model_.adv_f, {.learning_rate = cfg.lr_f});
    if (!model_.adv_g.layers().empty()) opt_g_ = nn::AdamState(model_.adv_g, {.learning_rate = cfg.lr_g});
  }

  TrainOutput run() {
    const std::size_t n = data_.rows();
    const auto b = static_cast<std::size_t>(cfg_.batch_size);
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      const std::vector<std::size_t> perm = batches_.permutation(n);
      std::vector<std::size_t> other;
      if (cfg_.mode == Mode::mine_representation) other = pairs_.permutation(n);
      EpochRow row{.epoch = epoch + 1};
      int count = 0;
      for (std::size_t start = 0; start + b <= n; start += b) {
        const std::vector<Eigen::Index> rows(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                             perm.begin() + static_cast<std::ptrdiff_t>(start + b));
        std::vector<Eigen::Index> mismatched;
        if (!other.empty()) {
          mismatched.assign(other.begin() + static_cast<std::ptrdiff_t>(start),
                            other.begin() + static_cast<std::ptrdiff_t>(start + b));
        }
        try {
          step(rows, mismatched, epoch, count, row);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::numeric) throw;
          std::ostringstream msg;
          msg << e.what() << " at epoch " << (epoch + 1) << ", batch " << (count + 1);
          fail(ErrorKind::run, msg.str());
        }
        ++count;
      }
      row.predictor_loss /= count;
      row.task_metric /= count;
      row.adversary_objective /= count;
      result_.epochs.push_back(row);
    }
    return {std::move(model_), std::move(result_)};
  }

 private:
  void trace(std::string_view event) const {
    if (hooks_.trace) hooks_.trace(event);
  }

  void check_loss_matches_head() const {
    const ad::Activation head = model_.predictor.layers().back().act;
    if (cfg_.loss == Loss::binary_cross_entropy && head != ad::Activation::sigmoid) {
      fail(ErrorKind::config, "binary_cross_entropy needs a Sig predictor head");
    }
    if (cfg_.loss == Loss::categorical_cross_entropy && head != ad::Activation::softmax_rows) {
      fail(ErrorKind::config, "categorical_cross_entropy needs an SM predictor head");
    }
  }

  NodeId task_loss(Tape& tape, NodeId prediction, NodeId target) const {
    switch (cfg_.loss) {
      case Loss::mse: return tape.mse(prediction, target);
      case Loss::binary_cross_entropy: return tape.binary_cross_entropy(prediction, target);
      case Loss::categorical_cross_entropy: return tape.categorical_cross_entropy(prediction, target);
    }
    return prediction;
  }

  double batch_task_metric(const ad::Tensor& prediction, const ad::Tensor& target) const {
    const double n = static_cast<double>(prediction.rows());
    switch (cfg_.loss) {
      case Loss::mse:
        return (prediction - target).squaredNorm() / n;
      case Loss::binary_cross_entropy: {
        double hits = 0.0;
        for (Eigen::Index i = 0; i < prediction.rows(); ++i) {
          hits += ((prediction(i, 0) >= 0.5) == (target(i, 0) >= 0.5)) ? 1.0 : 0.0;
        }
        return hits / n;
      }
      case Loss::categorical_cross_entropy: {
        double hits = 0.0;
        for (Eigen::Index i = 0; i < prediction.rows(); ++i) {
          Eigen::Index p = 0, t = 0;
          prediction.row(i).maxCoeff(&p);
          target.row(i).maxCoeff(&t);
          hits += p == t ? 1.0 : 0.0;
        }
        return hits / n;
      }
    }
    return 0.0;
  }

  void check_finite(double value, const char* what, int epoch, int batch) const {
    if (!std::isfinite(value)) {
      std::ostringstream msg;
      msg << "non-finite " << what << " at epoch " << (epoch + 1) << ", batch " << (batch + 1);
      fail(ErrorKind::run, msg.str());
    }
  }

  void step(const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& mismatched,
            int epoch, int batch, EpochRow& row) {
    const ad::Tensor xb = data_.x(rows, Eigen::all);
    const ad::Tensor sb = data_.s(rows, Eigen::all);
    const ad::Tensor yb = targets_(rows, Eigen::all);

    // Predictor objective and descent on w_phi.
    {
      Tape tape;
      const NodeId z = model_.encoder.forward(tape, tape.input(xb));
      const NodeId y_hat = model_.predictor.forward(tape, z);
      const NodeId loss = task_loss(tape, y_hat, tape.input(yb));
      const double value = tape.scalar(loss);
      check_finite(value, "predictor loss", epoch, batch);
      row.predictor_loss += value;
      row.task_metric += batch_task_metric(tape.value(y_hat), yb);
      const ad::Gradients grads = tape.backward(loss);
      opt_predictor_.step(model_.predictor, grads, Direction::descent);
      trace("predictor_descent");
    }

    Tape tape;
    const NodeId z = model_.encoder.forward(tape, tape.input(xb));
    const NodeId y_hat = model_.predictor.forward(tape, z);
    const NodeId loss_y = task_loss(tape, y_hat, tape.input(yb));
    check_finite(tape.scalar(loss_y), "predictor loss", epoch, batch);

    if (hooks_.skip_adversary) {
      const ad::Gradients grads = tape.backward(loss_y);
      opt_encoder_.step(model_.encoder, grads, Direction::descent);
      trace("encoder_descent");
      return;
    }

    // Adversary term whose gradient the encoder descends (scaled by lambda).
    NodeId penalty{};
    switch (cfg_.mode) {
      case Mode::hgr_representation:
      case Mode::hgr_prediction: {
        const NodeId adv_in = cfg_.mode == Mode::hgr_representation ? z : y_hat;
        const NodeId f_hat = tape.standardize(model_.adv_f.forward(tape, adv_in), cfg_.epsilon);
        const NodeId g_hat = tape.standardize(model_.adv_g.forward(tape, tape.input(sb)), cfg_.epsilon);
        trace("standardize");
        penalty = tape.mean(tape.mul(f_hat, g_hat));
        trace("objective");
        break;
      }
      case Mode::simple_adversary: {
        // The adversary minimizes its MSE; the encoder maximizes it.
        const NodeId s_hat = model_.adv_f.forward(tape, y_hat);
        penalty = tape.scale(tape.mse(s_hat, tape.input(sb)), -1.0);
        trace("objective");
        break;
      }
      case Mode::mine_representation: {
        const ad::Tensor s_other = data_.s(mismatched, Eigen::all);
        const NodeId joint = model_.adv_f.forward(tape, tape.concat_cols(z, tape.input(sb)));
        const NodeId marginal = model_.adv_f.forward(tape, tape.concat_cols(z, tape.input(s_other)));
        penalty = tape.sub(tape.mean(joint), tape.log_mean_exp(marginal));
        trace("objective");
        break;
      }
    }
    const double penalty_value = tape.scalar(penalty);
    check_finite(penalty_value, "adversary objective", epoch, batch);
    row.adversary_objective += cfg_.mode == Mode::simple_adversary ? -penalty_value : penalty_value;

    const ad::Gradients penalty_grads = tape.backward(penalty);
    const ad::Gradients task_grads = tape.backward(loss_y);

    // Ascent on J (HGR, MINE); for the simple adversary penalty = -MSE, so
    // ascent on it is descent on the adversary's own regression loss.
    opt_f_.step(model_.adv_f, penalty_grads, Direction::ascent);
    if (!model_.adv_g.layers().empty()) opt_g_.step(model_.adv_g, penalty_grads, Direction::ascent);
    trace("adversary_ascent");

    const ad::Gradients encoder_grads = combine(model_.encoder, task_grads, penalty_grads, cfg_.lambda);
    opt_encoder_.step(model_.encoder, encoder_grads, Direction::descent);
    trace("encoder_descent");
  }

  const Dataset& data_;
  FairTrainConfig cfg_;
  const TrainHooks& hooks_;
  CounterRng batches_;
  CounterRng pairs_;
  SampleMatrix targets_;
  FairModel model_;
  FairRunResult result_;
  nn::AdamState opt_encoder_;
  nn::AdamState opt_predictor_;
  nn::AdamState opt_f_;
  nn::AdamState opt_g_;
};

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::hgr_representation: return "hgr_representation";
    case Mode::hgr_prediction: return "hgr_prediction";
    case Mode::simple_adversary: return "simple_adversary";
    case Mode::mine_representation: return "mine_representation";
  }
  return "?";
}

std::string to_string(Loss l) {
  switch (l) {
    case Loss::mse: return "mse";
    case Loss::binary_cross_entropy: return "binary_cross_entropy";
    case Loss::categorical_cross_entropy: return "categorical_cross_entropy";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::hgr_representation, Mode::hgr_prediction, Mode::simple_adversary,
                 Mode::mine_representation}) {
    if (text == to_string(m)) return m;
  }
  fail(ErrorKind::config, "unknown mode '" + std::string(text) + "'");
}

Loss parse_loss(std::string_view text) {
  for (Loss l : {Loss::mse, Loss::binary_cross_entropy, Loss::categorical_cross_entropy}) {
    if (text == to_string(l)) return l;
  }
  fail(ErrorKind::config, "unknown loss '" + std::string(text) + "'");
}

void FairTrainConfig::validate() const {
  if (!(lambda >= 0.0)) fail(ErrorKind::config, "lambda must be >= 0");
  if (epochs < 1) fail(ErrorKind::config, "epochs must be >= 1");
  if (batch_size < 2) fail(ErrorKind::config, "batch_size must be >= 2");
  for (double lr : {lr_f, lr_g, lr_phi, lr_psi}) {
    if (!(lr > 0.0)) fail(ErrorKind::config, "learning rates must be > 0");
  }
}

SampleMatrix FairModel::latent(const SampleMatrix& x) const { return encoder.predict(x); }

SampleMatrix FairModel::predict(const SampleMatrix& x) const { return predictor.predict(encoder.predict(x)); }

TrainOutput train_fair(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks) {
  cfg.mode = Mode::hgr_representation;
  return Trainer(train, cfg, hooks).run();
}

TrainOutput train_fair_prediction(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks) {
  cfg.mode = Mode::hgr_prediction;
  return Trainer(train, cfg, hooks).run();
}

TrainOutput train_simple_adversary(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks) {
  cfg.mode = Mode::simple_adversary;
  return Trainer(train, cfg, hooks).run();
}

TrainOutput train_mine_representation(const Dataset& train, FairTrainConfig cfg, const TrainHooks& hooks) {
  cfg.mode = Mode::mine_representation;
  return Trainer(train, cfg, hooks).run();
}

TrainOutput train(const Dataset& train, const FairTrainConfig& cfg, const TrainHooks& hooks) {
  return Trainer(train, cfg, hooks).run();
}

}  // namespace renyi::fair
