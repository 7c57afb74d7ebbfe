#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace caranet {

// Dimension sizes, outermost first. Feature maps use (batch, channels,
// height, width).
using Shape = std::vector<int>;

std::int64_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Thrown on any dimension violation. Messages name the offending axis.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // persistent on leaves, scratch on interior nodes
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;
};

}  // namespace detail

/// Dense float64 tensor with reverse-mode automatic differentiation.
///
/// A Tensor is a cheap handle onto a shared node; copying shares the data.
/// Values are immutable once written by a forward op. Leaves created with
/// requires_grad = true collect gradients when backward() runs on a scalar
/// derived from them; leaf gradients accumulate across backward calls until
/// zero_grad() is called.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from_values(const Shape& shape, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const { return node_->shape[static_cast<size_t>(axis)]; }
  std::int64_t size() const { return static_cast<std::int64_t>(node_->values.size()); }

  const std::vector<double>& values() const { return node_->values; }
  double operator[](std::int64_t flat_index) const {
    return node_->values[static_cast<size_t>(flat_index)];
  }

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->leaf; }

  // Gradient of a leaf after backward(). Empty until the first backward pass
  // that reaches this leaf.
  const std::vector<double>& grad() const { return node_->grad; }
  void zero_grad();

  // In-place edit of a leaf's storage (optimizer updates, finite-difference
  // probes). Graphs built afterwards see the new values.
  std::vector<double>& leaf_values();

  /// Reverse-mode sweep from a scalar. Each reachable requires_grad leaf
  /// receives d(this)/d(leaf) added into its grad.
  void backward() const;

  // Convenience accessors for (N, C, H, W) feature maps.
  int batch() const { return require_4d("batch"), node_->shape[0]; }
  int channels() const { return require_4d("channels"), node_->shape[1]; }
  int height() const { return require_4d("height"), node_->shape[2]; }
  int width() const { return require_4d("width"), node_->shape[3]; }

  detail::Node* node() const { return node_.get(); }

  // Op factory: wraps freshly computed values into a graph node. Parents that
  // require grad make the result require grad; backward is dropped otherwise.
  static Tensor make(Shape shape, std::vector<double> values,
                     std::vector<Tensor> parents,
                     std::function<void(detail::Node&)> backward);

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  void require_4d(const char* what) const;

  std::shared_ptr<detail::Node> node_;
};

/// Free-function spelling of Tensor::backward.
void backward(const Tensor& loss);

inline std::int64_t flat4(const Shape& s, int n, int c, int h, int w) {
  return ((static_cast<std::int64_t>(n) * s[1] + c) * s[2] + h) * s[3] + w;
}

}  // namespace caranet
