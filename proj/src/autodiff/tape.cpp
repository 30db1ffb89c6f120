#include "renyi/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "renyi/error.hpp"

namespace renyi::ad {

namespace {

constexpr double kProbFloor = 1e-12;

void require_finite(const Tensor& t, const char* op) {
  if (!t.allFinite()) {
    fail(ErrorKind::numeric, std::string("non-finite input to ") + op);
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::shape, std::string(op) + ": shape mismatch " +
                               shape_string(a) + " vs " + shape_string(b));
  }
}

Tensor scalar_tensor(double v) {
  Tensor t(1, 1);
  t(0, 0) = v;
  return t;
}

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

}  // namespace

std::string to_string(Activation act) {
  switch (act) {
    case Activation::identity: return "None";
    case Activation::relu: return "R";
    case Activation::tanh: return "T";
    case Activation::sigmoid: return "Sig";
    case Activation::softmax_rows: return "SM";
  }
  return "?";
}

std::string shape_string(const Tensor& t) {
  std::ostringstream out;
  out << '(' << t.rows() << 'x' << t.cols() << ')';
  return out.str();
}

void Gradients::insert(NodeId node, const Tensor* storage, Tensor grad) {
  by_node_[node.index] = std::move(grad);
  if (storage != nullptr) by_storage_[storage] = node.index;
}

const Tensor& Gradients::at(NodeId node) const {
  auto it = by_node_.find(node.index);
  if (it == by_node_.end()) {
    fail(ErrorKind::invalid_argument,
         "no gradient for node " + std::to_string(node.index));
  }
  return it->second;
}

const Tensor* Gradients::find(const Tensor& parameter) const {
  auto it = by_storage_.find(&parameter);
  if (it == by_storage_.end()) return nullptr;
  return &by_node_.at(it->second);
}

Tape::Node Tape::make_node(Op op, NodeId a, NodeId b) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  return n;
}

NodeId Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

const Tape::Node& Tape::node(NodeId id) const {
  if (id.index >= nodes_.size()) {
    fail(ErrorKind::invalid_argument, "unknown node " + std::to_string(id.index));
  }
  return nodes_[id.index];
}

const Tensor& Tape::value(NodeId id) const { return node(id).value; }

double Tape::scalar(NodeId id) const {
  const Tensor& v = value(id);
  if (v.size() != 1) {
    fail(ErrorKind::shape, "scalar(): node has shape " + shape_string(v));
  }
  return v(0, 0);
}

NodeId Tape::input(Tensor value) {
  Node n = make_node(Op::input);
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::parameter(const Tensor& storage) {
  if (auto it = parameters_.find(&storage); it != parameters_.end()) {
    return NodeId{it->second};
  }
  Node n = make_node(Op::parameter);
  n.value = storage;
  n.requires_grad = true;
  n.storage = &storage;
  const NodeId id = push(std::move(n));
  parameters_[&storage] = id.index;
  return id;
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.cols() != vb.rows()) {
    fail(ErrorKind::shape, "matmul: inner dimensions differ, " +
                               shape_string(va) + " * " + shape_string(vb));
  }
  Node n = make_node(Op::matmul, a, b);
  n.value.noalias() = va * vb;
  n.requires_grad = grad_of(a) || grad_of(b);
  return push(std::move(n));
}

NodeId Tape::add_row(NodeId x, NodeId bias) {
  const Tensor& vx = value(x);
  const Tensor& vb = value(bias);
  if (vb.rows() != 1 || vb.cols() != vx.cols()) {
    fail(ErrorKind::shape, "add_row: bias " + shape_string(vb) +
                               " does not broadcast over " + shape_string(vx));
  }
  Node n = make_node(Op::add_row, x, bias);
  n.value = vx.rowwise() + vb.row(0);
  n.requires_grad = grad_of(x) || grad_of(bias);
  return push(std::move(n));
}

NodeId Tape::activation(NodeId x, Activation kind) {
  const Tensor& vx = value(x);
  require_finite(vx, "activation");
  Node n = make_node(Op::activation, x);
  n.act = kind;
  switch (kind) {
    case Activation::identity:
      n.value = vx;
      break;
    case Activation::relu:
      n.value = vx.cwiseMax(0.0);
      break;
    case Activation::tanh:
      n.value = vx.array().tanh().matrix();
      break;
    case Activation::sigmoid:
      n.value = (1.0 / (1.0 + (-vx.array()).exp())).matrix();
      break;
    case Activation::softmax_rows: {
      n.value.resize(vx.rows(), vx.cols());
      for (Eigen::Index r = 0; r < vx.rows(); ++r) {
        const double top = vx.row(r).maxCoeff();
        n.value.row(r) = (vx.row(r).array() - top).exp().matrix();
        n.value.row(r) /= n.value.row(r).sum();
      }
      break;
    }
  }
  n.requires_grad = grad_of(x);
  return push(std::move(n));
}

NodeId Tape::standardize(NodeId x, double epsilon) {
  const Tensor& vx = value(x);
  if (vx.cols() != 1) {
    fail(ErrorKind::shape, "standardize expects a single column, got " + shape_string(vx));
  }
  if (vx.rows() < 2) fail(ErrorKind::invalid_argument, "standardization needs >= 2 samples");
  require_finite(vx, "standardize");
  const double n = static_cast<double>(vx.rows());
  const double m = vx.mean();
  Node node = make_node(Op::standardize, x);
  node.cache = vx.array() - m;  // centered input
  const double var = node.cache.squaredNorm() / n;
  node.scalar = std::sqrt(var + epsilon);
  node.value = node.cache / node.scalar;
  node.requires_grad = grad_of(x);
  return push(std::move(node));
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "add");
  Node n = make_node(Op::add, a, b);
  n.value = value(a) + value(b);
  n.requires_grad = grad_of(a) || grad_of(b);
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "sub");
  Node n = make_node(Op::sub, a, b);
  n.value = value(a) - value(b);
  n.requires_grad = grad_of(a) || grad_of(b);
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same_shape(value(a), value(b), "mul");
  Node n = make_node(Op::mul, a, b);
  n.value = value(a).cwiseProduct(value(b));
  n.requires_grad = grad_of(a) || grad_of(b);
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double factor) {
  Node n = make_node(Op::scale, a);
  n.scalar = factor;
  n.value = value(a) * factor;
  n.requires_grad = grad_of(a);
  return push(std::move(n));
}

NodeId Tape::square(NodeId a) {
  Node n = make_node(Op::square, a);
  n.value = value(a).array().square().matrix();
  n.requires_grad = grad_of(a);
  return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  if (va.rows() != vb.rows()) {
    fail(ErrorKind::shape, "concat_cols: row counts differ, " + shape_string(va) +
                               " vs " + shape_string(vb));
  }
  Node n = make_node(Op::concat_cols, a, b);
  n.value.resize(va.rows(), va.cols() + vb.cols());
  n.value << va, vb;
  n.requires_grad = grad_of(a) || grad_of(b);
  return push(std::move(n));
}

NodeId Tape::sum(NodeId a) {
  Node n = make_node(Op::sum, a);
  n.value = scalar_tensor(value(a).sum());
  n.requires_grad = grad_of(a);
  return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
  const Tensor& va = value(a);
  if (va.size() == 0) fail(ErrorKind::shape, "mean of empty tensor");
  Node n = make_node(Op::mean, a);
  n.value = scalar_tensor(va.mean());
  n.requires_grad = grad_of(a);
  return push(std::move(n));
}

NodeId Tape::log_mean_exp(NodeId a) {
  const Tensor& va = value(a);
  if (va.size() == 0) fail(ErrorKind::shape, "log_mean_exp of empty tensor");
  require_finite(va, "log_mean_exp");
  const double top = va.maxCoeff();
  Node n = make_node(Op::log_mean_exp, a);
  n.cache = (va.array() - top).exp().matrix();
  const double total = n.cache.sum();
  n.cache /= total;  // softmax weights over all entries
  n.value = scalar_tensor(top + std::log(total / static_cast<double>(va.size())));
  n.requires_grad = grad_of(a);
  return push(std::move(n));
}

NodeId Tape::binary_cross_entropy(NodeId p, NodeId target) {
  const Tensor& vp = value(p);
  const Tensor& vy = value(target);
  require_same_shape(vp, vy, "binary_cross_entropy");
  double total = 0.0;
  for (Eigen::Index i = 0; i < vp.size(); ++i) {
    const double q = clamp_prob(vp.data()[i]);
    const double y = vy.data()[i];
    total -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  Node n = make_node(Op::bce, p, target);
  n.value = scalar_tensor(total / static_cast<double>(vp.size()));
  n.requires_grad = grad_of(p);
  return push(std::move(n));
}

NodeId Tape::categorical_cross_entropy(NodeId p, NodeId target) {
  const Tensor& vp = value(p);
  const Tensor& vy = value(target);
  require_same_shape(vp, vy, "categorical_cross_entropy");
  double total = 0.0;
  for (Eigen::Index i = 0; i < vp.size(); ++i) {
    const double y = vy.data()[i];
    if (y != 0.0) total -= y * std::log(std::max(vp.data()[i], kProbFloor));
  }
  Node n = make_node(Op::cce, p, target);
  n.value = scalar_tensor(total / static_cast<double>(vp.rows()));
  n.requires_grad = grad_of(p);
  return push(std::move(n));
}

NodeId Tape::mse(NodeId a, NodeId target) {
  require_same_shape(value(a), value(target), "mse");
  Node n = make_node(Op::mse, a, target);
  n.cache = value(a) - value(target);
  n.value = scalar_tensor(n.cache.squaredNorm() / static_cast<double>(n.cache.size()));
  n.requires_grad = grad_of(a) || grad_of(target);
  return push(std::move(n));
}

Gradients Tape::backward(NodeId loss) const {
  const Tensor& loss_value = value(loss);
  if (loss_value.size() != 1) {
    fail(ErrorKind::shape, "backward needs a scalar loss, got " + shape_string(loss_value));
  }

  std::vector<Tensor> grads(nodes_.size());
  auto accumulate = [&](NodeId id, const auto& g) {
    if (!nodes_[id.index].requires_grad) return;
    Tensor& slot = grads[id.index];
    if (slot.size() == 0) {
      slot = g;
    } else {
      slot += g;
    }
  };

  grads[loss.index] = Tensor::Ones(1, 1);
  for (std::size_t k = loss.index + 1; k-- > 0;) {
    const Node& n = nodes_[k];
    if (!n.requires_grad || grads[k].size() == 0) continue;
    const Tensor& g = grads[k];
    switch (n.op) {
      case Op::input:
      case Op::parameter:
        break;
      case Op::matmul:
        if (grad_of(n.a)) accumulate(n.a, (g * value(n.b).transpose()).eval());
        if (grad_of(n.b)) accumulate(n.b, (value(n.a).transpose() * g).eval());
        break;
      case Op::add_row:
        accumulate(n.a, g);
        if (grad_of(n.b)) accumulate(n.b, g.colwise().sum().eval());
        break;
      case Op::activation: {
        const Tensor& y = n.value;
        switch (n.act) {
          case Activation::identity:
            accumulate(n.a, g);
            break;
          case Activation::relu:
            accumulate(n.a, (value(n.a).array() > 0.0).select(g.array(), 0.0).matrix().eval());
            break;
          case Activation::tanh:
            accumulate(n.a, (g.array() * (1.0 - y.array().square())).matrix().eval());
            break;
          case Activation::sigmoid:
            accumulate(n.a, (g.array() * y.array() * (1.0 - y.array())).matrix().eval());
            break;
          case Activation::softmax_rows: {
            const Eigen::VectorXd inner = g.cwiseProduct(y).rowwise().sum();
            accumulate(n.a, (y.array() * (g.colwise() - inner).array()).matrix().eval());
            break;
          }
        }
        break;
      }
      case Op::standardize: {
        const double rows = static_cast<double>(g.rows());
        const double s = n.scalar;
        const double g_mean = g.sum() / rows;
        const double gx_mean = g.cwiseProduct(n.cache).sum() / rows;
        Tensor gx = ((g.array() - g_mean) - n.cache.array() * (gx_mean / (s * s))) / s;
        accumulate(n.a, gx);
        break;
      }
      case Op::add:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::sub:
        accumulate(n.a, g);
        if (grad_of(n.b)) accumulate(n.b, (-g).eval());
        break;
      case Op::mul:
        if (grad_of(n.a)) accumulate(n.a, g.cwiseProduct(value(n.b)).eval());
        if (grad_of(n.b)) accumulate(n.b, g.cwiseProduct(value(n.a)).eval());
        break;
      case Op::scale:
        accumulate(n.a, (g * n.scalar).eval());
        break;
      case Op::square:
        accumulate(n.a, (2.0 * g.cwiseProduct(value(n.a))).eval());
        break;
      case Op::concat_cols: {
        const Eigen::Index left = value(n.a).cols();
        if (grad_of(n.a)) accumulate(n.a, g.leftCols(left).eval());
        if (grad_of(n.b)) accumulate(n.b, g.rightCols(g.cols() - left).eval());
        break;
      }
      case Op::sum: {
        const Tensor& va = value(n.a);
        accumulate(n.a, Tensor::Constant(va.rows(), va.cols(), g(0, 0)));
        break;
      }
      case Op::mean: {
        const Tensor& va = value(n.a);
        accumulate(n.a, Tensor::Constant(va.rows(), va.cols(),
                                         g(0, 0) / static_cast<double>(va.size())));
        break;
      }
      case Op::log_mean_exp:
        accumulate(n.a, (n.cache * g(0, 0)).eval());
        break;
      case Op::bce: {
        const Tensor& vp = value(n.a);
        const Tensor& vy = value(n.b);
        const double scale = g(0, 0) / static_cast<double>(vp.size());
        Tensor gp(vp.rows(), vp.cols());
        for (Eigen::Index i = 0; i < vp.size(); ++i) {
          const double q = clamp_prob(vp.data()[i]);
          const double y = vy.data()[i];
          gp.data()[i] = scale * ((1.0 - y) / (1.0 - q) - y / q);
        }
        accumulate(n.a, gp);
        break;
      }
      case Op::cce: {
        const Tensor& vp = value(n.a);
        const Tensor& vy = value(n.b);
        const double scale = g(0, 0) / static_cast<double>(vp.rows());
        Tensor gp(vp.rows(), vp.cols());
        for (Eigen::Index i = 0; i < vp.size(); ++i) {
          gp.data()[i] = -scale * vy.data()[i] / std::max(vp.data()[i], kProbFloor);
        }
        accumulate(n.a, gp);
        break;
      }
      case Op::mse: {
        const double scale = 2.0 * g(0, 0) / static_cast<double>(n.cache.size());
        if (grad_of(n.a)) accumulate(n.a, (n.cache * scale).eval());
        if (grad_of(n.b)) accumulate(n.b, (n.cache * -scale).eval());
        break;
      }
    }
  }

  Gradients out;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Node& n = nodes_[k];
    if (n.op != Op::parameter) continue;
    Tensor g = grads[k].size() == 0 ? Tensor::Zero(n.value.rows(), n.value.cols())
                                    : std::move(grads[k]);
    out.insert(NodeId{k}, n.storage, std::move(g));
  }
  return out;
}

}  // namespace renyi::ad
