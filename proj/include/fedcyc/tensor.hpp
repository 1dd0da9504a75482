#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fedcyc {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Propagates this->grad into the grads of `inputs`.
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer();
};

}  // namespace detail

// Dense row-major array of 64-bit reals with an optional gradient slot.
//
// Tensors are cheap handles: copies share the same storage. Operations on
// tensors that require gradients record the computation so that
// `backward()` on a scalar result can populate the gradients of every leaf
// reached by the recorded graph.
class Tensor {
 public:
  Tensor();
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const;
  std::size_t dim() const { return shape().size(); }
  std::size_t size(std::size_t axis) const;
  std::size_t numel() const;
  bool empty() const { return numel() == 0; }

  std::span<const double> data() const;
  // Direct write access. Only meaningful on leaves (inputs, parameters);
  // mutating an interior value does not update recorded gradients.
  std::span<double> mutable_data();
  double item() const;

  bool requires_grad() const;
  bool has_grad() const;
  // Empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  void zero_grad();

  // Copy of the values with no history and no gradient.
  Tensor detach() const;
  // Reshape sharing no history; the element count must match.
  Tensor reshaped(Shape shape) const;

  // Reverse-mode sweep from this scalar. Leaves accumulate into their grads;
  // interior grads are reset first so repeated sweeps do not compound.
  void backward() const;

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  // Internal: used by op implementations.
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_recording_enabled();

}  // namespace fedcyc
