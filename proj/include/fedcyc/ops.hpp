#pragma once

#include <optional>
#include <vector>

#include "fedcyc/tensor.hpp"

namespace fedcyc::ops {

// 2-D cross-correlation. `input` is [C_in,H,W] or [N,C_in,H,W]; `kernel` is
// [C_out,C_in,k,k]; optional `bias` is [C_out]. Output spatial size is
// floor((H + 2*padding - k) / stride) + 1 with zero padding.
Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding,
              const std::optional<Tensor>& bias = std::nullopt);

// Nearest-neighbour x2 upsampling over the last two axes.
Tensor upsample2x(const Tensor& x);

Tensor relu(const Tensor& x);
Tensor leaky_relu(const Tensor& x, double slope = 0.2);
Tensor tanh(const Tensor& x);
Tensor abs(const Tensor& x);
Tensor square(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
Tensor add_scalar(const Tensor& x, double value);

// Reductions to a scalar (shape {}).
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// Stacks equally shaped tensors along a new leading axis. Gradients flow
// back to each part.
Tensor stack(const std::vector<Tensor>& parts);

}  // namespace fedcyc::ops
