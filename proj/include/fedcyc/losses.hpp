#pragma once

#include <optional>

#include "fedcyc/tensor.hpp"

namespace fedcyc {

struct LossWeights {
  double lambda_cycle = 10.0;
  double lambda_paired = 5.0;

  void validate() const;
};

// Least-squares adversarial terms.
// Generator side: mean((d - 1)^2) over every patch logit.
Tensor adv_loss_generator(const Tensor& logits_fake);
// Discriminator side: 0.5 * mean((d_real - 1)^2) + 0.5 * mean(d_fake^2).
Tensor adv_loss_discriminator(const Tensor& logits_real, const Tensor& logits_fake);

// Mean absolute difference; lambda is applied by compose_generator_loss.
Tensor cycle_loss(const Tensor& reconstructed, const Tensor& original);
Tensor paired_loss(const Tensor& translated, const Tensor& target);

struct GeneratorLossParts {
  Tensor adv_ab;
  Tensor adv_ba;
  Tensor cycle_a;
  Tensor cycle_b;
  // Present only for minibatches of true pairs.
  std::optional<Tensor> paired_ab;
  std::optional<Tensor> paired_ba;
};

// adv_ab + adv_ba + lambda_cycle * (cycle_a + cycle_b)
//   + lambda_paired * (paired_ab + paired_ba)
Tensor compose_generator_loss(const GeneratorLossParts& parts, const LossWeights& weights);

}  // namespace fedcyc
