#include "fedcyc/params.hpp"

#include <algorithm>
#include <cmath>

#include "fedcyc/errors.hpp"

namespace fedcyc {

ParamLayout::ParamLayout(const std::vector<NamedTensor>& params) {
  for (const auto& p : params) {
    entries_.push_back({p.name, p.tensor.shape(), total_});
    total_ += p.tensor.numel();
  }
}

ParamLayout ParamLayout::from_shapes(const std::vector<std::pair<std::string, Shape>>& shapes) {
  ParamLayout layout;
  for (const auto& [name, shape] : shapes) {
    layout.entries_.push_back({name, shape, layout.total_});
    layout.total_ += shape_numel(shape);
  }
  return layout;
}

void require_same_layout(const ParamLayout& a, const ParamLayout& b, const char* what) {
  if (a == b) return;
  throw ShapeError(std::string(what) + ": parameter layouts differ (" + std::to_string(a.entries().size()) +
                   " entries / " + std::to_string(a.total_size()) + " values vs " +
                   std::to_string(b.entries().size()) + " entries / " + std::to_string(b.total_size()) + " values)");
}

ParamVector flatten_values(const std::vector<NamedTensor>& params) {
  ParamVector out{{}, ParamLayout(params)};
  out.values.reserve(out.layout.total_size());
  for (const auto& p : params) {
    const auto d = p.tensor.data();
    out.values.insert(out.values.end(), d.begin(), d.end());
  }
  return out;
}

ParamVector flatten_grads(const std::vector<NamedTensor>& params) {
  ParamVector out{{}, ParamLayout(params)};
  out.values.reserve(out.layout.total_size());
  for (const auto& p : params) {
    if (p.tensor.has_grad()) {
      const auto g = p.tensor.grad();
      out.values.insert(out.values.end(), g.begin(), g.end());
    } else {
      out.values.insert(out.values.end(), p.tensor.numel(), 0.0);
    }
  }
  return out;
}

void unflatten_values(const std::vector<NamedTensor>& params, const ParamVector& vec) {
  const ParamLayout layout(params);
  if (vec.values.size() != layout.total_size()) {
    throw ShapeError("unflatten: vector has " + std::to_string(vec.values.size()) + " values, model expects " +
                     std::to_string(layout.total_size()));
  }
  require_same_layout(layout, vec.layout, "unflatten");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor t = params[i].tensor;
    const auto& e = layout.entries()[i];
    std::copy_n(vec.values.begin() + static_cast<std::ptrdiff_t>(e.offset), e.size(), t.mutable_data().begin());
  }
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double lr) {
  require_same_layout(params.layout, grad.layout, "sgd_step");
  if (params.values.size() != grad.values.size()) throw ShapeError("sgd_step: value count mismatch");
  ParamVector out = params;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= lr * grad.values[i];
  return out;
}

double l2_norm(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

}  // namespace fedcyc
