#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "renyi/error.hpp"
#include "renyi/nn.hpp"
#include "renyi/random.hpp"

namespace renyi::nn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

Activation parse_activation(std::string_view token, std::string_view layer) {
  if (token == "R") return Activation::relu;
  if (token == "T") return Activation::tanh;
  if (token == "Sig") return Activation::sigmoid;
  if (token == "SM") return Activation::softmax_rows;
  if (token == "None" || token.empty()) return Activation::identity;
  fail(ErrorKind::config, "unknown activation '" + std::string(token) + "' in layer '" +
                              std::string(layer) + "'");
}

LayerSpec parse_layer(std::string_view text) {
  text = trim(text);
  if (text.substr(0, 3) != "FC:") {
    fail(ErrorKind::config, "layer '" + std::string(text) + "' must start with FC:");
  }
  std::string_view rest = text.substr(3);
  const auto space = rest.find_first_of(" \t");
  const std::string_view width_text = trim(rest.substr(0, space));
  const std::string_view act_text =
      space == std::string_view::npos ? std::string_view{} : trim(rest.substr(space));

  LayerSpec spec;
  const auto [ptr, ec] =
      std::from_chars(width_text.data(), width_text.data() + width_text.size(), spec.width);
  if (ec != std::errc{} || ptr != width_text.data() + width_text.size() || spec.width < 1) {
    fail(ErrorKind::config, "bad layer width in '" + std::string(text) + "'");
  }
  spec.act = parse_activation(act_text, text);
  return spec;
}

}  // namespace

Architecture parse_architecture(std::string_view text) {
  Architecture arch;
  if (trim(text).empty()) fail(ErrorKind::config, "empty architecture");
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
    arch.push_back(parse_layer(piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return arch;
}

std::string format_architecture(const Architecture& arch) {
  std::ostringstream out;
  for (std::size_t i = 0; i < arch.size(); ++i) {
    if (i > 0) out << ", ";
    out << "FC:" << arch[i].width;
    if (arch[i].act != Activation::identity) out << ' ' << ad::to_string(arch[i].act);
  }
  return out.str();
}

Mlp Mlp::init(const Architecture& arch, int input_dim, std::uint64_t seed) {
  if (arch.empty()) fail(ErrorKind::invalid_argument, "network needs at least one layer");
  if (input_dim < 1) fail(ErrorKind::invalid_argument, "network input width must be >= 1");
  Mlp m;
  m.input_dim_ = input_dim;
  m.seed_ = seed;
  CounterRng rng(seed);
  int fan_in = input_dim;
  for (const LayerSpec& spec : arch) {
    if (spec.width < 1) fail(ErrorKind::invalid_argument, "layer width must be >= 1");
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + spec.width));
    Layer layer;
    layer.weight.resize(fan_in, spec.width);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
        layer.weight(r, c) = rng.uniform(-limit, limit);
      }
    }
    layer.bias = Tensor::Zero(1, spec.width);
    layer.act = spec.act;
    m.layers_.push_back(std::move(layer));
    fan_in = spec.width;
  }
  return m;
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.cols());
}

std::size_t Mlp::parameter_count() const {
  std::size_t total = 0;
  for (const Layer& l : layers_) total += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return total;
}

std::string Mlp::parameter_name(std::size_t layer, bool bias) {
  return "layer " + std::to_string(layer) + (bias ? " bias" : " weight");
}

NodeId Mlp::forward(Tape& tape, NodeId x) const {
  const Tensor& in = tape.value(x);
  if (in.cols() != input_dim_) {
    fail(ErrorKind::shape, "network expects " + std::to_string(input_dim_) +
                               " input columns, got " + ad::shape_string(in));
  }
  NodeId h = x;
  for (const Layer& layer : layers_) {
    h = tape.matmul(h, tape.parameter(layer.weight));
    h = tape.add_row(h, tape.parameter(layer.bias));
    if (layer.act != Activation::identity) h = tape.activation(h, layer.act);
  }
  return h;
}

Tensor Mlp::predict(const Tensor& x) const {
  Tape tape;
  return tape.value(forward(tape, tape.input(x)));
}

}  // namespace renyi::nn
