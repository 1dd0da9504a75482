#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "fedcyc/checkpoint.hpp"
#include "fedcyc/errors.hpp"
#include "fedcyc/losses.hpp"
#include "fedcyc/models.hpp"
#include "fedcyc/ops.hpp"
#include "test_util.hpp"

namespace fedcyc {
namespace {

using testing::finite_difference;
using testing::random_tensor;

Tensor random_image(std::size_t size, SeededRng& rng) {
  std::vector<double> v(size * size);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor({1, size, size}, std::move(v));
}

TEST(Generator, DefaultShapes) {
  SeededRng rng(1);
  const Generator g(GeneratorConfig{}, 7);
  const Tensor x = random_image(32, rng);
  EXPECT_EQ(g.forward(x).shape(), (Shape{1, 32, 32}));
  EXPECT_EQ(g.extract_latent(x).shape(), (Shape{32, 4, 4}));
  const Tensor batch = ops::stack({x, x, x});
  EXPECT_EQ(g.forward(batch).shape(), (Shape{3, 1, 32, 32}));
}

TEST(Generator, OutputInTanhRange) {
  SeededRng rng(2);
  GeneratorConfig cfg;
  cfg.init_std = 0.5;
  const Generator g(cfg, 3);
  const Tensor y = g.forward(random_image(32, rng));
  for (double v : y.data()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Generator, LatentTapIsClampedAndOneBased) {
  SeededRng rng(3);
  const Tensor x = random_image(32, rng);
  GeneratorConfig cfg;
  cfg.channels = {16, 32, 64};
  cfg.latent_tap_index = 1;
  EXPECT_EQ(Generator(cfg, 1).extract_latent(x).shape(), (Shape{16, 16, 16}));
  cfg.latent_tap_index = 2;
  EXPECT_EQ(Generator(cfg, 1).extract_latent(x).shape(), (Shape{32, 8, 8}));
  cfg.latent_tap_index = 0;
  EXPECT_THROW(Generator(cfg, 1), ShapeError);
}

TEST(Generator, WrongImageSizeNamesShape) {
  const Generator g(GeneratorConfig{}, 1);
  try {
    g.forward(Tensor::zeros({1, 16, 16}));
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("(1,16,16)"), std::string::npos);
  }
  GeneratorConfig bad;
  bad.image_size = 36;
  EXPECT_THROW(bad.validate(), ShapeError);
}

TEST(Generator, SameSeedSameOutputDifferentSeedDifferentOutput) {
  SeededRng rng(4);
  const Tensor x = random_image(32, rng);
  const Generator a(GeneratorConfig{}, 9), b(GeneratorConfig{}, 9), c(GeneratorConfig{}, 10);
  const Tensor ya = a.forward(x), yb = b.forward(x), yc = c.forward(x);
  bool differs = false;
  for (std::size_t i = 0; i < ya.numel(); ++i) {
    EXPECT_EQ(ya.data()[i], yb.data()[i]);
    differs |= ya.data()[i] != yc.data()[i];
  }
  EXPECT_TRUE(differs);
}

TEST(Generator, CopyIsDeep) {
  Generator a(GeneratorConfig{}, 5);
  Generator b(a);
  auto pa = flatten_params(a);
  const auto pb_before = flatten_params(b);
  for (double& v : pa.values) v += 1.0;
  unflatten_params(a, pa);
  EXPECT_EQ(flatten_params(b).values, pb_before.values);
  Generator c(GeneratorConfig{}, 6);
  c = a;
  EXPECT_EQ(flatten_params(c).values, pa.values);
}

TEST(Generator, ParameterNamesAndInitStatistics) {
  const Generator g(GeneratorConfig{}, 42);
  const auto params = g.parameters();
  ASSERT_FALSE(params.empty());
  EXPECT_EQ(params.front().name, "enc0.weight");
  EXPECT_EQ(params.back().name, "out.bias");
  double s = 0, s2 = 0;
  std::size_t n = 0;
  for (const auto& p : params) {
    if (p.name.find("weight") == std::string::npos) {
      for (double v : p.tensor.data()) EXPECT_EQ(v, 0.0);
      continue;
    }
    for (double v : p.tensor.data()) {
      s += v;
      s2 += v * v;
      ++n;
    }
  }
  const double sd = std::sqrt(s2 / n - (s / n) * (s / n));
  EXPECT_NEAR(sd, 0.02, 0.002);
}

TEST(Discriminator, DefaultPatchMap) {
  SeededRng rng(5);
  const Discriminator d(DiscriminatorConfig{}, 1);
  EXPECT_EQ(d.forward(random_image(32, rng)).shape(), (Shape{1, 4, 4}));
  const Tensor x = random_image(32, rng);
  EXPECT_EQ(d.forward(ops::stack({x, x})).shape(), (Shape{2, 1, 4, 4}));
}

TEST(Discriminator, ZeroWeightsGiveZeroLogits) {
  SeededRng rng(6);
  Discriminator d(DiscriminatorConfig{}, 1);
  auto p = flatten_params(d);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  unflatten_params(d, p);
  const Tensor y = d.forward(random_image(32, rng));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Generator, ZeroWeightsGiveZeroOutput) {
  SeededRng rng(7);
  Generator g(GeneratorConfig{}, 1);
  auto p = flatten_params(g);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  unflatten_params(g, p);
  const Tensor y = g.forward(random_image(32, rng));
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

double norm_relative_error(std::span<const double> a, const std::vector<double>& n) {
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  return std::sqrt(diff) / std::max(1e-12, std::max(std::sqrt(na), std::sqrt(nn)));
}

// End-to-end check through a small generator/discriminator pair with the real
// objective. The L1 cycle term has a kink at every pixel, so a 1e-4 step lands
// across one for some seeds; the per-layer checks cover the 1e-4 contract and
// this one uses a finer step.
TEST(ModelGradient, SmallGanObjective) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SeededRng rng(seed + 77);
    GeneratorConfig gc;
    gc.image_size = 8;
    gc.channels = {3, 4};
    gc.init_std = 0.3;
    DiscriminatorConfig dc;
    dc.image_size = 8;
    dc.channels = {3};
    dc.init_std = 0.3;
    const Generator g(gc, seed), f(gc, seed + 100);
    const Discriminator d(dc, seed + 200);
    const Tensor a = random_image(8, rng);
    auto loss = [&] {
      const Tensor fake = g.forward(a);
      return ops::add(adv_loss_generator(d.forward(fake)), ops::scale(cycle_loss(f.forward(fake), a), 10.0));
    };
    loss().backward();
    for (const auto& p : g.parameters()) {
      const auto numeric = finite_difference(
          p.tensor,
          [&] {
            NoGradGuard ng;
            return loss().item();
          },
          1e-6);
      EXPECT_LT(norm_relative_error(p.tensor.grad(), numeric), 1e-3) << p.name << " seed " << seed;
    }
  }
}

TEST(Params, FlattenUnflattenRoundTrip) {
  Generator g(GeneratorConfig{}, 3);
  const ParamVector v = flatten_params(g);
  EXPECT_EQ(v.size(), v.layout.total_size());
  Generator h(GeneratorConfig{}, 4);
  unflatten_params(h, v);
  EXPECT_EQ(flatten_params(h).values, v.values);
  std::size_t offset = 0;
  for (const auto& e : v.layout.entries()) {
    EXPECT_EQ(e.offset, offset);
    offset += e.size();
  }
}

TEST(Params, LayoutMismatchRejected) {
  Generator g(GeneratorConfig{}, 3);
  GeneratorConfig small;
  small.channels = {8, 8};
  Generator h(small, 3);
  EXPECT_THROW(unflatten_params(h, flatten_params(g)), ShapeError);
}

TEST(Params, SgdStep) {
  const ParamLayout layout = ParamLayout::from_shapes({{"w", {2}}});
  const ParamVector p{{1.0, 2.0}, layout}, g{{0.5, -1.0}, layout};
  EXPECT_EQ(sgd_step(p, g, 0.1).values, (std::vector<double>{0.95, 2.1}));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Generator g(GeneratorConfig{}, 12);
  ParamVector v = flatten_params(g);
  v.values[0] = -0.0;
  v.values[1] = 1e-310;
  std::stringstream ss;
  write_checkpoint(ss, v);
  const ParamVector r = read_checkpoint(ss);
  EXPECT_EQ(r.layout, v.layout);
  ASSERT_EQ(r.values.size(), v.values.size());
  EXPECT_EQ(std::memcmp(r.values.data(), v.values.data(), v.values.size() * sizeof(double)), 0);
}

TEST(Checkpoint, HeaderIsReadable) {
  const ParamVector v{{1.5, 2.5, 3.5}, ParamLayout::from_shapes({{"a.weight", {1, 2}}, {"b", {}}})};
  std::stringstream ss;
  write_checkpoint(ss, v);
  const std::string s = ss.str();
  EXPECT_EQ(s.rfind("fedcyc-params 1\nentries 2\ntotal 3\na.weight 1x2 0\nb scalar 2\ndata\n", 0), 0u);
  EXPECT_EQ(s.size(), std::string("fedcyc-params 1\nentries 2\ntotal 3\na.weight 1x2 0\nb scalar 2\ndata\n").size() + 24);
}

TEST(Checkpoint, TruncatedAndGarbageRejected) {
  const ParamVector v{{1.0, 2.0}, ParamLayout::from_shapes({{"w", {2}}})};
  std::stringstream ss;
  write_checkpoint(ss, v);
  std::string s = ss.str();
  std::stringstream trunc(s.substr(0, s.size() - 3));
  EXPECT_THROW(read_checkpoint(trunc), std::runtime_error);
  std::stringstream garbage("not a checkpoint\n");
  EXPECT_THROW(read_checkpoint(garbage), std::runtime_error);
}

}  // namespace
}  // namespace fedcyc
