#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fedcyc/dp.hpp"
#include "fedcyc/errors.hpp"
#include "fedcyc/losses.hpp"
#include "fedcyc/ops.hpp"
#include "test_util.hpp"

namespace fedcyc {
namespace {

using testing::random_tensor;

TEST(Losses, AdversarialGeneratorExamples) {
  EXPECT_DOUBLE_EQ(adv_loss_generator(Tensor::full({1, 4, 4}, 1.0)).item(), 0.0);
  EXPECT_DOUBLE_EQ(adv_loss_generator(Tensor::full({1, 4, 4}, 0.0)).item(), 1.0);
  EXPECT_DOUBLE_EQ(adv_loss_generator(Tensor({1, 1, 2}, {0.0, 3.0})).item(), 2.5);
}

TEST(Losses, AdversarialDiscriminatorExamples) {
  const Tensor ones = Tensor::full({1, 4, 4}, 1.0), zeros = Tensor::zeros({1, 4, 4});
  EXPECT_DOUBLE_EQ(adv_loss_discriminator(ones, zeros).item(), 0.0);
  EXPECT_DOUBLE_EQ(adv_loss_discriminator(zeros, ones).item(), 1.0);
  EXPECT_DOUBLE_EQ(adv_loss_discriminator(Tensor::full({1, 4, 4}, 0.5), Tensor::full({1, 4, 4}, 0.5)).item(), 0.25);
}

TEST(Losses, L1Examples) {
  const Tensor a({1, 2, 2}, {0.0, 0.5, -0.5, 1.0});
  EXPECT_EQ(cycle_loss(a, a).item(), 0.0);
  EXPECT_DOUBLE_EQ(cycle_loss(a, Tensor::zeros({1, 2, 2})).item(), 0.5);
  EXPECT_DOUBLE_EQ(paired_loss(Tensor::full({1, 2, 2}, 0.1), Tensor::full({1, 2, 2}, 0.4)).item(), 0.3);
  EXPECT_THROW(cycle_loss(a, Tensor::zeros({1, 2, 3})), ShapeError);
}

GeneratorLossParts scalar_parts(double aab, double aba, double ca, double cb, std::optional<double> pab,
                                std::optional<double> pba) {
  GeneratorLossParts p{Tensor::scalar(aab), Tensor::scalar(aba), Tensor::scalar(ca), Tensor::scalar(cb), {}, {}};
  if (pab) p.paired_ab = Tensor::scalar(*pab);
  if (pba) p.paired_ba = Tensor::scalar(*pba);
  return p;
}

TEST(Losses, ComposedWeightedSum) {
  const LossWeights w{10.0, 5.0};
  EXPECT_DOUBLE_EQ(compose_generator_loss(scalar_parts(0.1, 0.2, 0.3, 0.4, 0.5, 0.6), w).item(),
                   0.1 + 0.2 + 10 * 0.7 + 5 * 1.1);
  EXPECT_DOUBLE_EQ(compose_generator_loss(scalar_parts(0.1, 0.2, 0.3, 0.4, {}, {}), w).item(), 0.3 + 7.0);
  EXPECT_THROW(compose_generator_loss(scalar_parts(-0.1, 0.2, 0.3, 0.4, {}, {}), w), std::invalid_argument);
  EXPECT_THROW(compose_generator_loss(scalar_parts(0.1, 0.2, 0.3, 0.4, 0.1, {}), w), std::invalid_argument);
}

TEST(Losses, ComposedIsLinearInLambdas) {
  SeededRng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double c[6] = {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    const auto parts = scalar_parts(c[0], c[1], c[2], c[3], c[4], c[5]);
    const double l1 = rng.uniform(0, 20), l2 = rng.uniform(0, 20);
    const double base = compose_generator_loss(parts, {0.0, 0.0}).item();
    const double only_cycle = compose_generator_loss(parts, {l1, 0.0}).item() - base;
    const double only_paired = compose_generator_loss(parts, {0.0, l2}).item() - base;
    EXPECT_NEAR(compose_generator_loss(parts, {l1, l2}).item(), base + only_cycle + only_paired, 1e-12);
    EXPECT_NEAR(only_cycle, l1 * (c[2] + c[3]), 1e-12);
    EXPECT_GE(base, 0.0);
  }
}

ParamVector vec(std::vector<double> v) {
  const std::size_t n = v.size();
  return ParamVector{std::move(v), ParamLayout::from_shapes({{"g", {n}}})};
}

TEST(Clip, Examples) {
  const auto clipped = clip_gradient(vec({3.0, 4.0}), 1.0).values;
  EXPECT_DOUBLE_EQ(clipped[0], 0.6);
  EXPECT_DOUBLE_EQ(clipped[1], 0.8);
  EXPECT_EQ(clip_gradient(vec({0.3, 0.4}), 1.0).values, (std::vector<double>{0.3, 0.4}));
  EXPECT_EQ(clip_gradient(vec({0.0, 0.0}), 1.0).values, (std::vector<double>{0.0, 0.0}));
  const auto inf = std::numeric_limits<double>::infinity();
  EXPECT_EQ(clip_gradient(vec({30.0, 40.0}), inf).values, (std::vector<double>{30.0, 40.0}));
}

TEST(Clip, NonFiniteNamesParameter) {
  ParamVector g{{0.0, 1.0, std::nan("")}, ParamLayout::from_shapes({{"a", {1}}, {"b.weight", {2}}})};
  try {
    clip_gradient(g, 1.0);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("b.weight[1]"), std::string::npos);
  }
  EXPECT_THROW(clip_gradient(vec({1.0}), 0.0), std::invalid_argument);
}

TEST(Clip, NormBoundAndDirectionProperty) {
  SeededRng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(200);
    const double scale = std::pow(10.0, rng.uniform(-6, 6));
    const double c = std::pow(10.0, rng.uniform(-3, 3));
    std::vector<double> v(n);
    for (double& x : v) x = scale * rng.normal();
    const ParamVector g = vec(v);
    const ParamVector out = clip_gradient(g, c);
    const double norm_in = l2_norm(g.values), norm_out = l2_norm(out.values);
    EXPECT_LE(norm_out, c + 1e-12 * std::max(1.0, c));
    if (norm_in <= c) {
      EXPECT_EQ(out.values, g.values);
    } else {
      const double k = out.values[0] / g.values[0];
      EXPECT_GT(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(out.values[i], k * g.values[i], 1e-12 * std::abs(g.values[i]));
    }
  }
}

TEST(Noise, SigmaZeroIsExactAndDrawsNothing) {
  SeededRng rng(5);
  const ParamVector g = vec({1.0, -2.0, 3.5});
  const ParamVector out = add_noise(g, 1.0, 0.0, rng);
  EXPECT_EQ(out.values, g.values);
  EXPECT_EQ(rng.position(), 0u);
}

TEST(Noise, StatisticsMatchSigmaTimesClip) {
  const std::size_t n = 100000;
  for (double c : {0.5, 1.0, 2.0}) {
    for (double sigma : {0.5, 1.0}) {
      SeededRng rng(derive_seed(9, {static_cast<std::uint64_t>(c * 10), static_cast<std::uint64_t>(sigma * 10)}));
      const ParamVector out = add_noise(vec(std::vector<double>(n, 0.0)), c, sigma, rng);
      double s = 0, s2 = 0;
      for (double v : out.values) {
        s += v;
        s2 += v * v;
      }
      const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
      EXPECT_LT(std::abs(mean), 0.05 * sigma * c);
      EXPECT_NEAR(sd, sigma * c, 0.05 * sigma * c);
    }
  }
}

TEST(Noise, ReproducibleFromSeed) {
  SeededRng a(77), b(77);
  EXPECT_EQ(add_noise(vec({0, 0, 0, 0, 0}), 1.0, 1.0, a).values,
            add_noise(vec({0, 0, 0, 0, 0}), 1.0, 1.0, b).values);
}

TEST(DpStep, DisabledEqualsPlainSgd) {
  SeededRng rng(1);
  const ParamVector p = vec({1.0, 2.0, 3.0}), g = vec({10.0, -20.0, 30.0});
  DpConfig cfg;
  cfg.enabled = false;
  EXPECT_EQ(dp_gradient_step(p, g, cfg, 0.1, rng).values, sgd_step(p, g, 0.1).values);
  EXPECT_EQ(rng.position(), 0u);
}

TEST(DpStep, ClipsThenSteps) {
  SeededRng rng(1);
  DpConfig cfg{1.0, 0.0, true};
  const ParamVector out = dp_gradient_step(vec({0.0, 0.0}), vec({3.0, 4.0}), cfg, 1.0, rng);
  EXPECT_DOUBLE_EQ(out.values[0], -0.6);
  EXPECT_DOUBLE_EQ(out.values[1], -0.8);
}

TEST(DpStep, UpdateNormIsBoundedInExpectation) {
  // The per-step displacement is lr * (clipped + noise); its squared norm
  // averages at most lr^2 (C^2 + d sigma^2 C^2).
  const std::size_t d = 1000;
  DpConfig cfg{0.5, 1.0, true};
  double total = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    SeededRng rng(1000 + t);
    std::vector<double> g(d);
    for (double& x : g) x = 10 * rng.normal();
    const ParamVector out = dp_gradient_step(vec(std::vector<double>(d, 0.0)), vec(g), cfg, 0.1, rng);
    total += std::pow(l2_norm(out.values), 2);
  }
  const double bound = 0.01 * (0.25 + d * 0.25);
  EXPECT_LT(total / trials, bound * 1.05);
}

}  // namespace
}  // namespace fedcyc
