#include "fedcyc/dp.hpp"

#include <cmath>
#include <sstream>

#include "fedcyc/errors.hpp"

namespace fedcyc {

namespace {

void require_finite(const ParamVector& g, const char* what) {
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!std::isfinite(g.values[i])) {
      std::string where = "index " + std::to_string(i);
      for (const auto& e : g.layout.entries()) {
        if (i >= e.offset && i < e.offset + e.size()) {
          where = e.name + "[" + std::to_string(i - e.offset) + "]";
          break;
        }
      }
      std::ostringstream os;
      os << what << ": non-finite gradient value " << g.values[i] << " at " << where;
      throw NumericalError(os.str());
    }
  }
}

}  // namespace

void DpConfig::validate() const {
  if (enabled && !(clip_bound > 0.0)) throw std::invalid_argument("clip_bound must be > 0");
  if (!(noise_multiplier >= 0.0)) throw std::invalid_argument("noise_multiplier must be >= 0");
}

ParamVector clip_gradient(const ParamVector& grad, double clip_bound) {
  if (!(clip_bound > 0.0)) throw std::invalid_argument("clip_gradient: clip bound must be > 0");
  require_finite(grad, "clip_gradient");
  const double norm = l2_norm(grad.values);
  if (norm <= clip_bound) return grad;
  const double factor = clip_bound / norm;
  ParamVector out = grad;
  for (double& v : out.values) v *= factor;
  return out;
}

ParamVector add_noise(const ParamVector& grad, double clip_bound, double sigma, SeededRng& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  require_finite(grad, "add_noise");
  if (sigma == 0.0) return grad;
  const double stddev = sigma * clip_bound;
  if (!std::isfinite(stddev)) throw NumericalError("add_noise: noise scale sigma*C is not finite");
  ParamVector out = grad;
  for (double& v : out.values) v += stddev * rng.normal();
  return out;
}

ParamVector dp_gradient_step(const ParamVector& params, const ParamVector& raw_grad, const DpConfig& cfg, double lr,
                             SeededRng& rng) {
  require_same_layout(params.layout, raw_grad.layout, "dp_gradient_step");
  if (!cfg.enabled) return sgd_step(params, raw_grad, lr);
  cfg.validate();
  const ParamVector noisy = add_noise(clip_gradient(raw_grad, cfg.clip_bound), cfg.clip_bound, cfg.noise_multiplier, rng);
  return sgd_step(params, noisy, lr);
}

}  // namespace fedcyc
