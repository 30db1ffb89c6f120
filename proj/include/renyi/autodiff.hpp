#pragma once

// Define-by-run reverse-mode differentiation over dense double matrices.
// Rows are batch entries, columns are features. A Tape is built for one
// minibatch, differentiated once and then discarded.

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace renyi::ad {

using Tensor = Eigen::MatrixXd;

enum class Activation { identity, relu, tanh, sigmoid, softmax_rows };

std::string to_string(Activation act);

struct NodeId {
  std::size_t index = 0;
  friend bool operator==(NodeId, NodeId) = default;
};

std::string shape_string(const Tensor& t);

// Parameter gradients keyed by the node id of each parameter leaf. A lookup by
// parameter storage address is kept alongside, since optimizers hold the
// tensors rather than the node ids.
class Gradients {
 public:
  void insert(NodeId node, const Tensor* storage, Tensor grad);

  bool contains(NodeId node) const { return by_node_.count(node.index) != 0; }
  const Tensor& at(NodeId node) const;
  const Tensor* find(const Tensor& parameter) const;
  std::size_t size() const { return by_node_.size(); }

 private:
  std::unordered_map<std::size_t, Tensor> by_node_;
  std::unordered_map<const Tensor*, std::size_t> by_storage_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Constant leaf; never receives a gradient.
  NodeId input(Tensor value);
  // Trainable leaf. Registering the same storage twice returns the same node,
  // so a network applied to two batches accumulates into one gradient.
  NodeId parameter(const Tensor& storage);

  NodeId matmul(NodeId a, NodeId b);
  // x (rows x cols) plus a 1 x cols bias broadcast over rows.
  NodeId add_row(NodeId x, NodeId bias);
  NodeId activation(NodeId x, Activation kind);
  // (x - mean) / sqrt(var + epsilon) over the batch, var divided by n.
  NodeId standardize(NodeId x, double epsilon);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double factor);
  NodeId square(NodeId a);
  NodeId concat_cols(NodeId a, NodeId b);

  NodeId sum(NodeId a);
  NodeId mean(NodeId a);
  // log(mean(exp(a))) over all entries, evaluated with max subtraction.
  NodeId log_mean_exp(NodeId a);
  // Mean binary cross-entropy of probabilities p against 0/1 targets.
  NodeId binary_cross_entropy(NodeId p, NodeId target);
  // Mean over rows of -sum_c target_c log p_c.
  NodeId categorical_cross_entropy(NodeId p, NodeId target);
  NodeId mse(NodeId a, NodeId target);

  const Tensor& value(NodeId id) const;
  double scalar(NodeId id) const;
  std::size_t size() const { return nodes_.size(); }

  Gradients backward(NodeId loss) const;

 private:
  enum class Op {
    input,
    parameter,
    matmul,
    add_row,
    activation,
    standardize,
    add,
    sub,
    mul,
    scale,
    square,
    concat_cols,
    sum,
    mean,
    log_mean_exp,
    bce,
    cce,
    mse,
  };

  struct Node {
    Op op = Op::input;
    NodeId a{};
    NodeId b{};
    Tensor value;
    Tensor cache;
    double scalar = 0.0;
    Activation act = Activation::identity;
    bool requires_grad = false;
    const Tensor* storage = nullptr;
  };

  static Node make_node(Op op, NodeId a = {}, NodeId b = {});
  NodeId push(Node node);
  const Node& node(NodeId id) const;
  bool grad_of(NodeId id) const { return node(id).requires_grad; }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> parameters_;
};

}  // namespace renyi::ad
