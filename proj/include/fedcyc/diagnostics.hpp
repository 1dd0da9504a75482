#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "fedcyc/data.hpp"
#include "fedcyc/models.hpp"
#include "fedcyc/rng.hpp"

namespace fedcyc {

enum class LatentGroup { kRealA, kFakeA, kRealB, kFakeB };

std::string to_string(LatentGroup group);
LatentGroup latent_group_from_string(const std::string& name);

struct LatentPoint {
  int sample_id = 0;
  LatentGroup group = LatentGroup::kRealA;
  double x = 0.0;
  double y = 0.0;
};

// Splits the final axis (length L, even) into (L/2, 2) and averages over every
// other axis, returning the two means.
std::pair<double, double> project_latent(const Tensor& latent);

// For n randomly chosen test samples: realA from gen_ab's encoder on A, fakeB
// from gen_ba's encoder on gen_ab(A), realB from gen_ba's encoder on B and
// fakeA from gen_ab's encoder on gen_ba(B). n is capped at the test-set size.
// Points are ordered by sample, then realA, fakeA, realB, fakeB.
std::vector<LatentPoint> latent_cloud(const Generator& gen_ab, const Generator& gen_ba,
                                      const std::vector<Sample>& test_set, std::size_t n, SeededRng& rng);

inline constexpr std::size_t kOverlapBins = 16;

struct CloudSummary {
  double overlap_a = 0.0;  // histogram intersection of realA vs fakeA
  double overlap_b = 0.0;  // realB vs fakeB
  // Trace of each group's 2x2 sample covariance, indexed by LatentGroup.
  std::array<double, 4> diversity{};
};

// Intersection of two normalized 16x16 histograms over the joint bounding box.
double histogram_overlap(const std::vector<std::pair<double, double>>& first,
                         const std::vector<std::pair<double, double>>& second);
double cloud_diversity(const std::vector<std::pair<double, double>>& points);
CloudSummary cloud_summary(const std::vector<LatentPoint>& points);

}  // namespace fedcyc
