#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "renyi/autodiff.hpp"

namespace renyi::nn {

using ad::Activation;
using ad::NodeId;
using ad::Tape;
using ad::Tensor;

struct LayerSpec {
  int width = 1;
  Activation act = Activation::identity;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using Architecture = std::vector<LayerSpec>;

// Parses the table notation "FC:64 R, FC:64 R, FC:1". Activations are
// R, T, Sig, SM or None; a missing activation means None.
Architecture parse_architecture(std::string_view text);
std::string format_architecture(const Architecture& arch);

struct Layer {
  Tensor weight;  // in_dim x out_dim
  Tensor bias;    // 1 x out_dim
  Activation act = Activation::identity;
};

class Mlp {
 public:
  Mlp() = default;

  // Glorot-uniform weights, zero biases.
  static Mlp init(const Architecture& arch, int input_dim, std::uint64_t seed);

  // Records the batched forward pass. x must have input_dim() columns.
  NodeId forward(Tape& tape, NodeId x) const;
  // Tape-free evaluation; same arithmetic as forward().
  Tensor predict(const Tensor& x) const;

  int input_dim() const { return input_dim_; }
  int output_dim() const;
  std::uint64_t seed() const { return seed_; }
  std::size_t parameter_count() const;

  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& layers() { return layers_; }

  // Human-readable parameter name, e.g. "layer 2 weight".
  static std::string parameter_name(std::size_t layer, bool bias);

 private:
  std::vector<Layer> layers_;
  int input_dim_ = 0;
  std::uint64_t seed_ = 0;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

enum class Direction { descent, ascent };

class AdamState {
 public:
  AdamState() = default;
  AdamState(const Mlp& model, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step_count() const { return steps_; }

  // One bias-corrected Adam update of every parameter of `model`.
  void step(Mlp& model, const ad::Gradients& grads, Direction direction);

 private:
  AdamConfig config_;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
  std::uint64_t steps_ = 0;
};

// Free-function spelling of AdamState::step.
void adam_step(AdamState& state, Mlp& model, const ad::Gradients& grads, Direction direction);

}  // namespace renyi::nn
