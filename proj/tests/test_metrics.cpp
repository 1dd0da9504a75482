#include <gtest/gtest.h>

#include <cmath>

#include "fedcyc/diagnostics.hpp"
#include "fedcyc/errors.hpp"
#include "fedcyc/metrics.hpp"
#include "fedcyc/rng.hpp"

namespace fedcyc {
namespace {

Tensor constant(std::size_t n, double v) { return Tensor::full({1, n, n}, v); }

Tensor random_unit(std::size_t n, SeededRng& rng) {
  std::vector<double> v(n * n);
  for (double& x : v) x = rng.uniform();
  return Tensor({1, n, n}, std::move(v));
}

// Direct per-window SSIM with a full 2-D Gaussian kernel and explicit
// weighted moments, independent of the separable implementation.
double ssim_direct(const Tensor& a, const Tensor& b) {
  const int n = static_cast<int>(a.size(1)), k = 11;
  std::vector<double> w(k * k);
  double wsum = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      w[i * k + j] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      wsum += w[i * k + j];
    }
  for (double& v : w) v /= wsum;
  const double c1 = 1e-4, c2 = 9e-4;
  double total = 0;
  int count = 0;
  for (int y = 0; y + k <= n; ++y)
    for (int x = 0; x + k <= n; ++x) {
      double mx = 0, my = 0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          mx += w[i * k + j] * a.data()[(y + i) * n + x + j];
          my += w[i * k + j] * b.data()[(y + i) * n + x + j];
        }
      double vx = 0, vy = 0, cxy = 0;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const double da = a.data()[(y + i) * n + x + j] - mx, db = b.data()[(y + i) * n + x + j] - my;
          vx += w[i * k + j] * da * da;
          vy += w[i * k + j] * db * db;
          cxy += w[i * k + j] * da * db;
        }
      total += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return total / count;
}

TEST(Mae, Examples) {
  EXPECT_EQ(mae(constant(4, 0.3), constant(4, 0.3)), 0.0);
  EXPECT_NEAR(mae(constant(4, 0.6), constant(4, 0.5)), 0.1, 1e-15);
  Tensor half({1, 2, 2}, {0.2, 0.2, 0.0, 0.0});
  EXPECT_NEAR(mae(half, Tensor::zeros({1, 2, 2})), 0.1, 1e-15);
  EXPECT_THROW(mae(constant(4, 0), constant(5, 0)), ShapeError);
}

TEST(Psnr, Examples) {
  EXPECT_EQ(psnr(constant(8, 0.4), constant(8, 0.4)), kPsnrCap);
  EXPECT_NEAR(psnr(constant(8, 0.6), constant(8, 0.5)), 20.0, 1e-9);
  EXPECT_NEAR(psnr(constant(8, 0.0), constant(8, 1.0)), 0.0, 1e-12);
}

TEST(Ssim, ClosedForms) {
  EXPECT_NEAR(ssim(constant(16, 0.2), constant(16, 0.8)), (0.32 + 1e-4) / (0.68 + 1e-4), 1e-12);
  EXPECT_NEAR(ssim(constant(16, 0.2), constant(16, 0.8)), 0.4707, 1e-4);
  SeededRng rng(1);
  const Tensor x = random_unit(16, rng);
  EXPECT_EQ(ssim(x, x), 1.0);
  EXPECT_THROW(ssim(constant(10, 0.1), constant(10, 0.1)), ShapeError);
}

TEST(Ssim, MatchesDirectFormulaOnRandomImages) {
  SeededRng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor a = random_unit(16, rng), b = random_unit(16, rng);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ssim_direct(a, b), 1e-9);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(Metrics, SymmetricAndMaximalOnIdentity) {
  SeededRng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_unit(16, rng), b = random_unit(16, rng);
    EXPECT_EQ(mae(a, b), mae(b, a));
    EXPECT_EQ(psnr(a, b), psnr(b, a));
    EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-15);
    EXPECT_LT(ssim(a, b), ssim(a, a));
    EXPECT_LT(psnr(a, b), psnr(a, a));
  }
}

TEST(Metrics, UnitRangeMapping) {
  const Tensor t = to_unit_range(Tensor({3}, {-1.0, 0.0, 1.0}));
  EXPECT_EQ(std::vector<double>(t.data().begin(), t.data().end()), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Projection, Examples) {
  EXPECT_EQ(project_latent(Tensor::full({3, 2, 4}, 1.0)), std::make_pair(1.0, 1.0));
  EXPECT_EQ(project_latent(Tensor({1, 1, 4}, {1, 2, 3, 4})), std::make_pair(2.0, 3.0));
  EXPECT_THROW(project_latent(Tensor::zeros({2, 3})), ShapeError);
}

TEST(Projection, Linear) {
  SeededRng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(64 * 16), w(64 * 16);
    for (double& x : v) x = rng.normal();
    for (double& x : w) x = rng.normal();
    const double alpha = rng.uniform(-3, 3);
    std::vector<double> comb(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) comb[i] = alpha * v[i] + w[i];
    const auto pv = project_latent(Tensor({64, 4, 4}, v));
    const auto pw = project_latent(Tensor({64, 4, 4}, w));
    const auto pc = project_latent(Tensor({64, 4, 4}, comb));
    EXPECT_NEAR(pc.first, alpha * pv.first + pw.first, 1e-12);
    EXPECT_NEAR(pc.second, alpha * pv.second + pw.second, 1e-12);
  }
}

TEST(Overlap, IdenticalDisjointAndDegenerate) {
  const std::vector<std::pair<double, double>> a{{0, 0}, {1, 1}, {0.5, 0.2}, {0.3, 0.9}};
  EXPECT_EQ(histogram_overlap(a, a), 1.0);
  std::vector<std::pair<double, double>> far;
  for (const auto& [x, y] : a) far.emplace_back(x + 10, y + 10);
  EXPECT_EQ(histogram_overlap(a, far), 0.0);
  const std::vector<std::pair<double, double>> same(5, {2.0, 3.0});
  EXPECT_EQ(histogram_overlap(same, same), 1.0);
  EXPECT_EQ(cloud_diversity(same), 0.0);
}

TEST(Overlap, BoundedProperty) {
  SeededRng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<double, double>> a(2 + rng.uniform_index(50)), b(2 + rng.uniform_index(50));
    for (auto& p : a) p = {rng.normal(), rng.normal()};
    for (auto& p : b) p = {rng.normal(0.5, 1), rng.normal()};
    const double o = histogram_overlap(a, b);
    EXPECT_GE(o, 0.0);
    EXPECT_LE(o, 1.0);
    EXPECT_DOUBLE_EQ(o, histogram_overlap(b, a));
    EXPECT_GE(cloud_diversity(a), 0.0);
  }
}

TEST(Diversity, UnbiasedCovarianceTrace) {
  // x: {0,2} var 2, y: {0,0} var 0.
  EXPECT_DOUBLE_EQ(cloud_diversity({{0, 0}, {2, 0}}), 2.0);
}

TEST(LatentCloud, LengthOrderAndDeterminism) {
  GeneratorConfig cfg;
  cfg.image_size = 16;
  cfg.channels = {4, 8};
  const Generator ab(cfg, 1), ba(cfg, 2);
  const auto test = synth_dataset(7, 16, 3);
  SeededRng r1(9), r2(9);
  const auto c1 = latent_cloud(ab, ba, test, 5, r1);
  const auto c2 = latent_cloud(ab, ba, test, 5, r2);
  ASSERT_EQ(c1.size(), 20u);
  for (std::size_t i = 0; i < c1.size(); ++i) {
    EXPECT_EQ(c1[i].sample_id, c2[i].sample_id);
    EXPECT_EQ(c1[i].x, c2[i].x);
    EXPECT_EQ(c1[i].y, c2[i].y);
    EXPECT_EQ(static_cast<std::size_t>(c1[i].group), i % 4);
    EXPECT_EQ(c1[i].sample_id, c1[i - i % 4].sample_id);
    EXPECT_TRUE(std::isfinite(c1[i].x) && std::isfinite(c1[i].y));
  }
  SeededRng r3(9);
  EXPECT_EQ(latent_cloud(ab, ba, test, 400, r3).size(), 28u);
  SeededRng r4(9);
  EXPECT_THROW(latent_cloud(ab, ba, {}, 4, r4), std::invalid_argument);
}

TEST(LatentCloud, RealAMatchesEncoderOnScaledInput) {
  GeneratorConfig cfg;
  cfg.image_size = 16;
  cfg.channels = {4, 8};
  const Generator ab(cfg, 1), ba(cfg, 2);
  const auto test = synth_dataset(1, 16, 3);
  SeededRng rng(1);
  const auto cloud = latent_cloud(ab, ba, test, 1, rng);
  std::vector<double> v(test[0].modality_a.data().begin(), test[0].modality_a.data().end());
  for (double& x : v) x = 2 * x - 1;
  const auto expect = project_latent(ab.extract_latent(Tensor({1, 16, 16}, v)));
  EXPECT_EQ(cloud[0].x, expect.first);
  EXPECT_EQ(cloud[0].y, expect.second);
}

TEST(Summary, GroupsAndNames) {
  std::vector<LatentPoint> pts;
  for (int i = 0; i < 4; ++i)
    for (int g = 0; g < 4; ++g) pts.push_back({i, static_cast<LatentGroup>(g), double(i), g == 1 ? double(i) : 0.0});
  const CloudSummary s = cloud_summary(pts);
  EXPECT_GE(s.overlap_a, 0.0);
  EXPECT_LE(s.overlap_a, 1.0);
  EXPECT_EQ(s.overlap_b, 1.0);
  EXPECT_GT(s.diversity[1], s.diversity[0]);
  for (LatentGroup g : {LatentGroup::kRealA, LatentGroup::kFakeA, LatentGroup::kRealB, LatentGroup::kFakeB})
    EXPECT_EQ(latent_group_from_string(to_string(g)), g);
  pts.resize(5);
  EXPECT_THROW(cloud_summary(pts), std::invalid_argument);
}

}  // namespace
}  // namespace fedcyc
