#include <cmath>

#include "renyi/error.hpp"
#include "renyi/nn.hpp"

namespace renyi::nn {

AdamState::AdamState(const Mlp& model, AdamConfig config) : config_(config) {
  for (const Layer& layer : model.layers()) {
    first_.push_back(Tensor::Zero(layer.weight.rows(), layer.weight.cols()));
    second_.push_back(Tensor::Zero(layer.weight.rows(), layer.weight.cols()));
    first_.push_back(Tensor::Zero(1, layer.bias.cols()));
    second_.push_back(Tensor::Zero(1, layer.bias.cols()));
  }
}

void AdamState::step(Mlp& model, const ad::Gradients& grads, Direction direction) {
  auto& layers = model.layers();
  if (first_.size() != 2 * layers.size()) {
    fail(ErrorKind::invalid_argument, "optimizer state does not match network layout");
  }
  // Resolve every gradient before touching any parameter.
  std::vector<const Tensor*> resolved;
  resolved.reserve(first_.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (bool bias : {false, true}) {
      const Tensor& param = bias ? layers[l].bias : layers[l].weight;
      const Tensor* g = grads.find(param);
      if (g == nullptr) {
        fail(ErrorKind::invalid_argument, "missing gradient for " + Mlp::parameter_name(l, bias));
      }
      if (g->rows() != param.rows() || g->cols() != param.cols()) {
        fail(ErrorKind::shape, "gradient shape " + ad::shape_string(*g) + " differs from " +
                                   Mlp::parameter_name(l, bias) + " " + ad::shape_string(param));
      }
      resolved.push_back(g);
    }
  }

  ++steps_;
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(config_.beta1, t);
  const double c2 = 1.0 - std::pow(config_.beta2, t);
  const double sign = direction == Direction::descent ? 1.0 : -1.0;

  for (std::size_t k = 0; k < resolved.size(); ++k) {
    Tensor& param = (k % 2 == 0) ? layers[k / 2].weight : layers[k / 2].bias;
    const auto g = (*resolved[k]).array() * sign;
    first_[k].array() = config_.beta1 * first_[k].array() + (1.0 - config_.beta1) * g;
    second_[k].array() = config_.beta2 * second_[k].array() + (1.0 - config_.beta2) * g.square();
    param.array() -= config_.learning_rate * (first_[k].array() / c1) /
                     ((second_[k].array() / c2).sqrt() + config_.epsilon);
  }
}

void adam_step(AdamState& state, Mlp& model, const ad::Gradients& grads, Direction direction) {
  state.step(model, grads, direction);
}

}  // namespace renyi::nn
