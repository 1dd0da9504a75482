#pragma once

#include "fedcyc/params.hpp"
#include "fedcyc/rng.hpp"

namespace fedcyc {

struct DpConfig {
  double clip_bound = 1.0;        // C
  double noise_multiplier = 1.0;  // sigma; noise stddev is sigma * C
  bool enabled = true;

  void validate() const;
};

// g * min(1, C / ||g||_2) over the whole vector. C may be +infinity.
ParamVector clip_gradient(const ParamVector& grad, double clip_bound);

// g + z with z_i ~ N(0, (sigma * C)^2) drawn in index order from `rng`.
// sigma == 0 returns the input unchanged and draws nothing.
ParamVector add_noise(const ParamVector& grad, double clip_bound, double sigma, SeededRng& rng);

// params - lr * (clip(raw_grad, C) + noise). With the mechanism disabled this
// is exactly sgd_step(params, raw_grad, lr).
ParamVector dp_gradient_step(const ParamVector& params, const ParamVector& raw_grad, const DpConfig& cfg, double lr,
                             SeededRng& rng);

}  // namespace fedcyc
