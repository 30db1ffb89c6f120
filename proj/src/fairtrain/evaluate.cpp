#include <cmath>

#include "renyi/error.hpp"
#include "renyi/fairtrain.hpp"
#include "renyi/random.hpp"

namespace renyi::fair {

const std::vector<std::string>& FinalMetrics::names() {
  static const std::vector<std::string> kNames = {"accuracy", "mse",     "hgr_nn_z", "hgr_nn_yhat",
                                                  "hgr_kde",  "hgr_rdc", "mine",     "fairquant"};
  return kNames;
}

std::vector<std::pair<std::string, double>> FinalMetrics::named() const {
  const double values[] = {accuracy, mse, hgr_nn_z, hgr_nn_yhat, hgr_kde, hgr_rdc, mine, fairquant};
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < names().size(); ++i) out.emplace_back(names()[i], values[i]);
  return out;
}

Eigen::VectorXd prediction_column(const SampleMatrix& predictions, Task task) {
  if (task != Task::multiclass || predictions.cols() == 1) return predictions.col(0);
  Eigen::VectorXd out(predictions.rows());
  for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
    Eigen::Index arg = 0;
    predictions.row(i).maxCoeff(&arg);
    out(i) = static_cast<double>(arg);
  }
  return out;
}

FinalMetrics evaluate(const FairModel& model, const Dataset& test, const EvalOptions& options) {
  if (test.rows() == 0) fail(ErrorKind::invalid_argument, "evaluate: empty test set");
  const SampleMatrix z = model.latent(test.x);
  const SampleMatrix predictions = model.predictor.predict(z);
  const Eigen::VectorXd y_hat = prediction_column(predictions, test.task);
  const SampleMatrix y_hat_m = y_hat;
  const double n = static_cast<double>(test.rows());

  FinalMetrics out;
  switch (test.task) {
    case Task::binary: {
      double hits = 0.0;
      for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
        hits += ((y_hat(i) >= 0.5) == (test.y(i, 0) >= 0.5)) ? 1.0 : 0.0;
      }
      out.accuracy = hits / n;
      break;
    }
    case Task::multiclass: {
      double hits = 0.0;
      for (Eigen::Index i = 0; i < y_hat.size(); ++i) {
        hits += std::llround(y_hat(i)) == std::llround(test.y(i, 0)) ? 1.0 : 0.0;
      }
      out.accuracy = hits / n;
      break;
    }
    case Task::regression:
      out.mse = (y_hat - test.y.col(0)).squaredNorm() / n;
      break;
  }

  const auto s0 = column(test.s);
  const bool constant_prediction = y_hat.maxCoeff() == y_hat.minCoeff();
  metrics::HgrNnConfig est = options.estimator;
  est.batch_size = std::min<int>(est.batch_size, static_cast<int>(test.rows()));

  if (options.hgr_nn_z) out.hgr_nn_z = metrics::hgr_nn(z, test.s, est).estimate;
  if (options.hgr_nn_yhat) out.hgr_nn_yhat = metrics::hgr_nn(y_hat_m, test.s, est).estimate;
  if (options.hgr_kde && test.s.cols() == 1) {
    out.hgr_kde = constant_prediction ? 0.0 : metrics::hgr_kde(column(y_hat_m), s0, options.kde_bins).estimate;
  }
  if (options.hgr_rdc) {
    out.hgr_rdc = metrics::hgr_rdc(y_hat_m, test.s, 20, 1.0 / 6.0, CounterRng::derive(est.seed, 21)).estimate;
  }
  if (options.mine) out.mine = metrics::mine_mi(y_hat_m, test.s, est).estimate;
  if (options.fairquant && test.s.cols() == 1) {
    out.fairquant = metrics::fairquant(column(y_hat_m), s0, options.fairquant_quantiles);
  }
  return out;
}

}  // namespace renyi::fair
