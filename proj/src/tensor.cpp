#include "caranet/tensor.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace caranet {

std::int64_t numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

namespace {

std::shared_ptr<detail::Node> new_leaf(const Shape& shape, std::vector<double> values,
                                       bool requires_grad) {
  for (size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] <= 0) {
      throw ShapeError("tensor axis " + std::to_string(i) + " must be positive, got " +
                       std::to_string(shape[i]));
    }
  }
  if (static_cast<std::int64_t>(values.size()) != numel(shape)) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not match shape " + shape_string(shape));
  }
  auto node = std::make_shared<detail::Node>();
  node->shape = shape;
  node->values = std::move(values);
  node->requires_grad = requires_grad;
  node->leaf = true;
  return node;
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return Tensor(new_leaf(shape, std::vector<double>(static_cast<size_t>(numel(shape)), 0.0),
                         requires_grad));
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  return Tensor(new_leaf(shape, std::vector<double>(static_cast<size_t>(numel(shape)), value),
                         requires_grad));
}

Tensor Tensor::from_values(const Shape& shape, std::vector<double> values, bool requires_grad) {
  return Tensor(new_leaf(shape, std::move(values), requires_grad));
}

Tensor Tensor::scalar(double value) { return from_values({1}, {value}); }

void Tensor::zero_grad() {
  if (!node_->leaf) throw std::logic_error("zero_grad is only valid on leaves");
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

std::vector<double>& Tensor::leaf_values() {
  if (!node_->leaf) throw std::logic_error("only leaf tensors may be edited in place");
  return node_->values;
}

void Tensor::require_4d(const char* what) const {
  if (node_->shape.size() != 4) {
    throw ShapeError(std::string(what) + " accessor needs a 4-d tensor, got shape " +
                     shape_string(node_->shape));
  }
}

Tensor Tensor::make(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                    std::function<void(detail::Node&)> backward) {
  auto node = new_leaf(shape, std::move(values), false);
  bool needs_grad = false;
  for (const Tensor& p : parents) {
    if (p.defined() && p.requires_grad()) {
      needs_grad = true;
      break;
    }
  }
  if (needs_grad) {
    node->requires_grad = true;
    node->leaf = false;
    node->parents.reserve(parents.size());
    for (const Tensor& p : parents) node->parents.push_back(p.node_);
    node->backward = std::move(backward);
  }
  return Tensor(node);
}

void Tensor::backward() const {
  if (!defined()) throw std::logic_error("backward on an undefined tensor");
  if (size() != 1) {
    throw ShapeError("backward needs a scalar loss, got shape " + shape_string(node_->shape));
  }
  if (!node_->requires_grad) {
    throw std::logic_error("loss is detached: no requires_grad leaf reaches it");
  }

  // Depth-first post-order over parents, then reversed, gives a valid
  // reverse-topological sweep of the DAG.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Interior grads are scratch per sweep; leaf grads persist and accumulate.
  for (detail::Node* node : order) {
    if (node->leaf) {
      if (node->grad.empty()) node->grad.assign(node->values.size(), 0.0);
    } else {
      node->grad.assign(node->values.size(), 0.0);
    }
  }

  if (node_->leaf) {
    node_->grad[0] += 1.0;  // d(loss)/d(loss)
    return;
  }
  node_->grad[0] = 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = *it;
    if (!node->leaf && node->backward) node->backward(*node);
  }
}

void backward(const Tensor& loss) { loss.backward(); }

}  // namespace caranet
