#include "fedcyc/metrics.hpp"

#include <array>
#include <cmath>

#include "fedcyc/errors.hpp"

namespace fedcyc {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  if (a.numel() == 0) throw ShapeError(std::string(what) + ": empty images");
}

std::array<double, kWindow> gaussian_1d() {
  std::array<double, kWindow> w{};
  double total = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

// Separable weighted mean over every valid window of an h x w plane.
std::vector<double> filter_valid(const double* plane, std::size_t h, std::size_t w,
                                 const std::array<double, kWindow>& g) {
  const std::size_t oh = h - kWindow + 1;
  const std::size_t ow = w - kWindow + 1;
  std::vector<double> rows(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * plane[y * w + x + k];
      rows[y * ow + x] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += g[k] * rows[(y + k) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

}  // namespace

double mae(const Tensor& pred, const Tensor& target) {
  require_same(pred, target, "mae");
  const auto p = pred.data();
  const auto t = target.data();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - t[i]);
  return s / static_cast<double>(p.size());
}

double psnr(const Tensor& pred, const Tensor& target) {
  require_same(pred, target, "psnr");
  const auto p = pred.data();
  const auto t = target.data();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  const double mse = s / static_cast<double>(p.size());
  if (mse < 1e-10) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Tensor& pred, const Tensor& target) {
  require_same(pred, target, "ssim");
  if (pred.dim() < 2) throw ShapeError("ssim: images need at least two axes");
  const std::size_t h = pred.shape()[pred.dim() - 2];
  const std::size_t w = pred.shape()[pred.dim() - 1];
  if (h < kWindow || w < kWindow) {
    throw ShapeError("ssim: image " + shape_to_string(pred.shape()) + " smaller than the 11x11 window");
  }
  const auto g = gaussian_1d();
  const std::size_t planes = pred.numel() / (h * w);
  const auto pd = pred.data();
  const auto td = target.data();
  double total = 0.0;
  std::size_t count = 0;
  std::vector<double> xx(h * w), yy(h * w), xy(h * w);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* x = pd.data() + p * h * w;
    const double* y = td.data() + p * h * w;
    for (std::size_t i = 0; i < h * w; ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, g);
    const auto my = filter_valid(y, h, w, g);
    const auto exx = filter_valid(xx.data(), h, w, g);
    const auto eyy = filter_valid(yy.data(), h, w, g);
    const auto exy = filter_valid(xy.data(), h, w, g);
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = exx[i] - mx[i] * mx[i];
      const double vy = eyy[i] - my[i] * my[i];
      const double cxy = exy[i] - mx[i] * my[i];
      const double num = (2.0 * mx[i] * my[i] + kC1) * (2.0 * cxy + kC2);
      const double den = (mx[i] * mx[i] + my[i] * my[i] + kC1) * (vx + vy + kC2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

Tensor to_unit_range(const Tensor& x) {
  std::vector<double> out(x.data().begin(), x.data().end());
  for (double& v : out) v = 0.5 * (v + 1.0);
  return Tensor(x.shape(), std::move(out));
}

}  // namespace fedcyc
