#pragma once

#include <string>

#include "fedcyc/tensor.hpp"

namespace fedcyc {

struct MetricsRecord {
  int round = 0;  // round for federated runs, epoch for centralized runs
  std::string direction;  // "A->B" or "B->A"
  double mae = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

inline constexpr double kPsnrCap = 99.0;

// All three expect equally shaped images with values in [0,1].
double mae(const Tensor& pred, const Tensor& target);
// 10 log10(1 / MSE), capped at kPsnrCap when MSE < 1e-10.
double psnr(const Tensor& pred, const Tensor& target);
// Mean SSIM over all valid 11x11 windows (Gaussian weights, sigma 1.5,
// K1 = 0.01, K2 = 0.03, dynamic range 1), averaged over leading planes.
double ssim(const Tensor& pred, const Tensor& target);

// Maps generator output from [-1,1] to [0,1].
Tensor to_unit_range(const Tensor& x);

}  // namespace fedcyc
