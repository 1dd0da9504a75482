#pragma once

#include <string>
#include <utility>
#include <vector>

#include "fedcyc/tensor.hpp"

namespace fedcyc {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct LayoutEntry {
  std::string name;
  Shape shape;
  std::size_t offset = 0;

  std::size_t size() const { return shape_numel(shape); }
  bool operator==(const LayoutEntry&) const = default;
};

// Describes how a model's parameters are laid out in a flat vector. Entries
// are contiguous and in model-declaration order.
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const std::vector<NamedTensor>& params);
  // Builds a layout from (name, shape) pairs, assigning contiguous offsets.
  static ParamLayout from_shapes(const std::vector<std::pair<std::string, Shape>>& shapes);

  const std::vector<LayoutEntry>& entries() const { return entries_; }
  std::size_t total_size() const { return total_; }
  bool operator==(const ParamLayout&) const = default;

 private:
  std::vector<LayoutEntry> entries_;
  std::size_t total_ = 0;
};

struct ParamVector {
  std::vector<double> values;
  ParamLayout layout;

  std::size_t size() const { return values.size(); }
};

// Throws ShapeError when the two layouts differ.
void require_same_layout(const ParamLayout& a, const ParamLayout& b, const char* what);

ParamVector flatten_values(const std::vector<NamedTensor>& params);
// Gradients of the parameters; parameters without a gradient contribute zeros.
ParamVector flatten_grads(const std::vector<NamedTensor>& params);
void unflatten_values(const std::vector<NamedTensor>& params, const ParamVector& vec);

template <typename Model>
ParamVector flatten_params(const Model& model) {
  return flatten_values(model.parameters());
}

template <typename Model>
ParamVector flatten_param_grads(const Model& model) {
  return flatten_grads(model.parameters());
}

template <typename Model>
void unflatten_params(Model& model, const ParamVector& vec) {
  unflatten_values(model.parameters(), vec);
}

// theta - lr * grad, element-wise.
ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double lr);

double l2_norm(const std::vector<double>& values);

}  // namespace fedcyc
