#include "fedcyc/losses.hpp"

#include "fedcyc/errors.hpp"
#include "fedcyc/ops.hpp"

namespace fedcyc {

namespace {

void require_nonempty(const Tensor& t, const char* what) {
  if (t.numel() == 0) throw ShapeError(std::string(what) + ": empty logit map");
}

Tensor l1(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
                     shape_to_string(b.shape()));
  }
  require_nonempty(a, what);
  return ops::mean(ops::abs(ops::sub(a, b)));
}

void require_scalar_nonnegative(const Tensor& t, const char* name) {
  if (t.numel() != 1) throw ShapeError(std::string("loss component ") + name + " is not a scalar");
  if (!(t.item() >= 0.0)) {
    throw std::invalid_argument(std::string("loss component ") + name + " is negative or NaN");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda_cycle >= 0.0) || !(lambda_paired >= 0.0)) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
}

Tensor adv_loss_generator(const Tensor& logits_fake) {
  require_nonempty(logits_fake, "adv_loss_generator");
  return ops::mean(ops::square(ops::add_scalar(logits_fake, -1.0)));
}

Tensor adv_loss_discriminator(const Tensor& logits_real, const Tensor& logits_fake) {
  require_nonempty(logits_real, "adv_loss_discriminator");
  require_nonempty(logits_fake, "adv_loss_discriminator");
  Tensor real_term = ops::mean(ops::square(ops::add_scalar(logits_real, -1.0)));
  Tensor fake_term = ops::mean(ops::square(logits_fake));
  return ops::scale(ops::add(real_term, fake_term), 0.5);
}

Tensor cycle_loss(const Tensor& reconstructed, const Tensor& original) {
  return l1(reconstructed, original, "cycle_loss");
}

Tensor paired_loss(const Tensor& translated, const Tensor& target) { return l1(translated, target, "paired_loss"); }

Tensor compose_generator_loss(const GeneratorLossParts& parts, const LossWeights& weights) {
  weights.validate();
  require_scalar_nonnegative(parts.adv_ab, "adv_ab");
  require_scalar_nonnegative(parts.adv_ba, "adv_ba");
  require_scalar_nonnegative(parts.cycle_a, "cycle_a");
  require_scalar_nonnegative(parts.cycle_b, "cycle_b");
  if (parts.paired_ab.has_value() != parts.paired_ba.has_value()) {
    throw std::invalid_argument("paired loss terms must be given for both directions or neither");
  }
  Tensor total = ops::add(parts.adv_ab, parts.adv_ba);
  total = ops::add(total, ops::scale(ops::add(parts.cycle_a, parts.cycle_b), weights.lambda_cycle));
  if (parts.paired_ab) {
    require_scalar_nonnegative(*parts.paired_ab, "paired_ab");
    require_scalar_nonnegative(*parts.paired_ba, "paired_ba");
    total = ops::add(total, ops::scale(ops::add(*parts.paired_ab, *parts.paired_ba), weights.lambda_paired));
  }
  return total;
}

}  // namespace fedcyc
