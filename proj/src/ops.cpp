#include "fedcyc/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "fedcyc/errors.hpp"

namespace fedcyc::ops {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;

using BackwardFn = std::function<void(detail::Node&)>;

Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs, BackwardFn backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  if (grad_recording_enabled()) {
    const bool any = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
    if (any) {
      node->requires_grad = true;
      for (auto& t : inputs) node->inputs.push_back(t.node());
      node->backward = std::move(backward);
    }
  }
  return Tensor(std::move(node));
}

template <typename Fn, typename Deriv>
Tensor unary(const Tensor& x, Fn fn, Deriv deriv) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(in[i]);
  auto xn = x.node();
  return make_result(x.shape(), std::move(out), {x}, [xn, deriv](detail::Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * deriv(xn->value[i], self.value[i]);
  });
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
}

struct ConvGeometry {
  std::size_t batch, c_in, h, w, c_out, k, out_h, out_w;
  int stride, padding;
  std::size_t patch() const { return c_in * k * k; }
  std::size_t out_pixels() const { return out_h * out_w; }
};

// Writes the [c_in*k*k, out_h*out_w] patch matrix for one image.
void im2col(const double* img, const ConvGeometry& g, double* col) {
  const std::size_t opix = g.out_pixels();
  for (std::size_t c = 0; c < g.c_in; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        double* row = col + ((c * g.k + ky) * g.k + kx) * opix;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy) * g.stride - g.padding + static_cast<long>(ky);
          double* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<long>(g.h)) {
            std::fill(dst, dst + g.out_w, 0.0);
            continue;
          }
          const double* src = img + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox) * g.stride - g.padding + static_cast<long>(kx);
            dst[ox] = (ix < 0 || ix >= static_cast<long>(g.w)) ? 0.0 : src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeometry& g, double* img) {
  const std::size_t opix = g.out_pixels();
  for (std::size_t c = 0; c < g.c_in; ++c) {
    for (std::size_t ky = 0; ky < g.k; ++ky) {
      for (std::size_t kx = 0; kx < g.k; ++kx) {
        const double* row = col + ((c * g.k + ky) * g.k + kx) * opix;
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const long iy = static_cast<long>(oy) * g.stride - g.padding + static_cast<long>(ky);
          if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
          double* dst = img + (c * g.h + static_cast<std::size_t>(iy)) * g.w;
          const double* src = row + oy * g.out_w;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const long ix = static_cast<long>(ox) * g.stride - g.padding + static_cast<long>(kx);
            if (ix >= 0 && ix < static_cast<long>(g.w)) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, int stride, int padding,
              const std::optional<Tensor>& bias) {
  const bool batched = input.dim() == 4;
  if (!batched && input.dim() != 3) {
    throw ShapeError("conv2d: input must be [C,H,W] or [N,C,H,W], got " + shape_to_string(input.shape()));
  }
  if (kernel.dim() != 4 || kernel.size(2) != kernel.size(3)) {
    throw ShapeError("conv2d: kernel must be [C_out,C_in,k,k], got " + shape_to_string(kernel.shape()));
  }
  const std::size_t off = batched ? 1 : 0;
  ConvGeometry g{};
  g.batch = batched ? input.size(0) : 1;
  g.c_in = input.size(off);
  g.h = input.size(off + 1);
  g.w = input.size(off + 2);
  g.c_out = kernel.size(0);
  g.k = kernel.size(2);
  g.stride = stride;
  g.padding = padding;
  if (kernel.size(1) != g.c_in) {
    throw ShapeError("conv2d: input " + shape_to_string(input.shape()) + " has " + std::to_string(g.c_in) +
                     " channels but kernel " + shape_to_string(kernel.shape()) + " expects " +
                     std::to_string(kernel.size(1)));
  }
  if (stride < 1 || padding < 0) throw ShapeError("conv2d: stride must be >= 1 and padding >= 0");
  if (g.k > g.h + 2 * static_cast<std::size_t>(padding) || g.k > g.w + 2 * static_cast<std::size_t>(padding)) {
    throw ShapeError("conv2d: kernel " + shape_to_string(kernel.shape()) + " larger than padded input " +
                     shape_to_string(input.shape()));
  }
  if (bias && (bias->dim() != 1 || bias->size(0) != g.c_out)) {
    throw ShapeError("conv2d: bias must be [C_out], got " + shape_to_string(bias->shape()));
  }
  g.out_h = (g.h + 2 * padding - g.k) / stride + 1;
  g.out_w = (g.w + 2 * padding - g.k) / stride + 1;

  const std::size_t in_stride = g.c_in * g.h * g.w;
  const std::size_t out_stride = g.c_out * g.out_pixels();
  // Operands are copied into Eigen-owned (aligned) matrices: Eigen's kernels
  // pick vectorization paths by pointer alignment, which would otherwise make
  // the rounding depend on where the heap put each buffer.
  auto cols = std::make_shared<std::vector<RowMatrix>>(g.batch);
  std::vector<double> out(g.batch * out_stride);
  const RowMatrix w = ConstMap(kernel.data().data(), g.c_out, g.patch());
  RowMatrix prod(g.c_out, g.out_pixels());
  for (std::size_t n = 0; n < g.batch; ++n) {
    RowMatrix& col = (*cols)[n];
    col.resize(g.patch(), g.out_pixels());
    im2col(input.data().data() + n * in_stride, g, col.data());
    prod.noalias() = w * col;
    double* o = out.data() + n * out_stride;
    for (std::size_t c = 0; c < g.c_out; ++c) {
      const double b = bias ? bias->data()[c] : 0.0;
      for (std::size_t p = 0; p < g.out_pixels(); ++p) {
        o[c * g.out_pixels() + p] = bias ? prod(c, p) + b : prod(c, p);
      }
    }
  }

  Shape out_shape = batched ? Shape{g.batch, g.c_out, g.out_h, g.out_w} : Shape{g.c_out, g.out_h, g.out_w};
  std::vector<Tensor> inputs{input, kernel};
  if (bias) inputs.push_back(*bias);
  auto in_node = input.node();
  auto k_node = kernel.node();
  auto b_node = bias ? bias->node() : nullptr;
  return make_result(std::move(out_shape), std::move(out), std::move(inputs),
                     [g, cols, in_node, k_node, b_node, in_stride, out_stride](detail::Node& self) {
                       const std::size_t opix = g.out_pixels();
                       const RowMatrix wmat = ConstMap(k_node->value.data(), g.c_out, g.patch());
                       RowMatrix gout(g.c_out, opix);
                       RowMatrix dw = RowMatrix::Zero(g.c_out, g.patch());
                       RowMatrix dcol;
                       for (std::size_t n = 0; n < g.batch; ++n) {
                         gout = ConstMap(self.grad.data() + n * out_stride, g.c_out, opix);
                         if (k_node->requires_grad) dw.noalias() += gout * (*cols)[n].transpose();
                         if (b_node && b_node->requires_grad) {
                           auto& db = b_node->grad_buffer();
                           for (std::size_t c = 0; c < g.c_out; ++c) {
                             double total = 0.0;
                             for (std::size_t p = 0; p < opix; ++p) total += gout(c, p);
                             db[c] += total;
                           }
                         }
                         if (in_node->requires_grad) {
                           dcol.noalias() = wmat.transpose() * gout;
                           col2im_add(dcol.data(), g, in_node->grad_buffer().data() + n * in_stride);
                         }
                       }
                       if (k_node->requires_grad) {
                         auto& kg = k_node->grad_buffer();
                         for (std::size_t i = 0; i < kg.size(); ++i) kg[i] += dw.data()[i];
                       }
                     });
}

Tensor upsample2x(const Tensor& x) {
  if (x.dim() < 2) throw ShapeError("upsample2x: need at least 2 axes, got " + shape_to_string(x.shape()));
  Shape shape = x.shape();
  const std::size_t h = shape[shape.size() - 2];
  const std::size_t w = shape[shape.size() - 1];
  const std::size_t planes = x.numel() / (h * w);
  shape[shape.size() - 2] = 2 * h;
  shape[shape.size() - 1] = 2 * w;
  std::vector<double> out(x.numel() * 4);
  const auto in = x.data();
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    double* dst = out.data() + p * 4 * h * w;
    for (std::size_t y = 0; y < 2 * h; ++y) {
      for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[y * 2 * w + xx] = src[(y / 2) * w + xx / 2];
    }
  }
  auto xn = x.node();
  return make_result(std::move(shape), std::move(out), {x}, [xn, planes, h, w](detail::Node& self) {
    if (!xn->requires_grad) return;
    auto& g = xn->grad_buffer();
    for (std::size_t p = 0; p < planes; ++p) {
      const double* src = self.grad.data() + p * 4 * h * w;
      double* dst = g.data() + p * h * w;
      for (std::size_t y = 0; y < 2 * h; ++y) {
        for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[(y / 2) * w + xx / 2] += src[y * 2 * w + xx];
      }
    }
  });
}

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
               [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(x, [slope](double v) { return v > 0.0 ? v : slope * v; },
               [slope](double in, double) { return in > 0.0 ? 1.0 : slope; });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double out) { return 1.0 - out * out; });
}

Tensor abs(const Tensor& x) {
  // Subgradient 0 at the kink.
  return unary(x, [](double v) { return std::abs(v); },
               [](double in, double) { return in > 0.0 ? 1.0 : (in < 0.0 ? -1.0 : 0.0); });
}

Tensor square(const Tensor& x) {
  return unary(x, [](double v) { return v * v; }, [](double in, double) { return 2.0 * in; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(x, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(x, [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

namespace {
Tensor add_scaled(const Tensor& a, const Tensor& b, double sign, const char* name) {
  require_same_shape(a, b, name);
  std::vector<double> out(a.numel());
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + sign * bv[i];
  auto an = a.node();
  auto bn = b.node();
  return make_result(a.shape(), std::move(out), {a, b}, [an, bn, sign](detail::Node& self) {
    if (an->requires_grad) {
      auto& g = an->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (bn->requires_grad) {
      auto& g = bn->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return add_scaled(a, b, 1.0, "add"); }

Tensor sub(const Tensor& a, const Tensor& b) { return add_scaled(a, b, -1.0, "sub"); }

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  auto xn = x.node();
  return make_result(Shape{}, {total}, {x}, [xn](detail::Node& self) {
    if (!xn->requires_grad) return;
    for (double& g : xn->grad_buffer()) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ShapeError("mean of an empty tensor");
  const double n = static_cast<double>(x.numel());
  double total = 0.0;
  for (double v : x.data()) total += v;
  auto xn = x.node();
  return make_result(Shape{}, {total / n}, {x}, [xn, n](detail::Node& self) {
    if (!xn->requires_grad) return;
    const double g0 = self.grad[0] / n;
    for (double& g : xn->grad_buffer()) g += g0;
  });
}

Tensor stack(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("stack of zero tensors");
  const Shape& inner = parts.front().shape();
  const std::size_t n = parts.front().numel();
  std::vector<double> out;
  out.reserve(n * parts.size());
  for (const auto& p : parts) {
    if (p.shape() != inner) {
      throw ShapeError("stack: shape mismatch " + shape_to_string(inner) + " vs " + shape_to_string(p.shape()));
    }
    out.insert(out.end(), p.data().begin(), p.data().end());
  }
  Shape shape{parts.size()};
  shape.insert(shape.end(), inner.begin(), inner.end());
  std::vector<std::shared_ptr<detail::Node>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  return make_result(std::move(shape), std::move(out), parts, [nodes, n](detail::Node& self) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!nodes[k]->requires_grad) continue;
      auto& g = nodes[k]->grad_buffer();
      for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[k * n + i];
    }
  });
}

}  // namespace fedcyc::ops
