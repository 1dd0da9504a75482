#include "fedcyc/diagnostics.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedcyc/errors.hpp"

namespace fedcyc {

std::string to_string(LatentGroup group) {
  switch (group) {
    case LatentGroup::kRealA: return "realA";
    case LatentGroup::kFakeA: return "fakeA";
    case LatentGroup::kRealB: return "realB";
    case LatentGroup::kFakeB: return "fakeB";
  }
  return "unknown";
}

LatentGroup latent_group_from_string(const std::string& name) {
  if (name == "realA") return LatentGroup::kRealA;
  if (name == "fakeA") return LatentGroup::kFakeA;
  if (name == "realB") return LatentGroup::kRealB;
  if (name == "fakeB") return LatentGroup::kFakeB;
  throw std::invalid_argument("unknown latent group '" + name + "'");
}

std::pair<double, double> project_latent(const Tensor& latent) {
  if (latent.dim() == 0 || latent.numel() < 2) throw ShapeError("project_latent: need at least two elements");
  const std::size_t last = latent.shape().back();
  if (last % 2 != 0) {
    throw ShapeError("project_latent: final axis of " + shape_to_string(latent.shape()) + " has odd length");
  }
  // After the (L/2, 2) reshape the size-2 axis is the innermost one, so
  // even flat indices feed x and odd ones feed y.
  const auto d = latent.data();
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < d.size(); i += 2) {
    sx += d[i];
    sy += d[i + 1];
  }
  const double n = static_cast<double>(d.size() / 2);
  return {sx / n, sy / n};
}

std::vector<LatentPoint> latent_cloud(const Generator& gen_ab, const Generator& gen_ba,
                                      const std::vector<Sample>& test_set, std::size_t n, SeededRng& rng) {
  if (test_set.empty()) throw std::invalid_argument("latent_cloud: empty test set");
  n = std::min(n, test_set.size());
  std::vector<std::size_t> idx(test_set.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates: the first n slots are a uniform sample without replacement.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }

  NoGradGuard no_grad;
  auto to_model = [](const Tensor& unit) {
    std::vector<double> v(unit.data().begin(), unit.data().end());
    for (double& x : v) x = 2.0 * x - 1.0;
    return Tensor(unit.shape(), std::move(v));
  };
  std::vector<LatentPoint> out;
  out.reserve(4 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = test_set[idx[i]];
    const Tensor a = to_model(s.modality_a);
    const Tensor b = to_model(s.modality_b);
    const Tensor fake_b = gen_ab.forward(a);
    const Tensor fake_a = gen_ba.forward(b);
    auto push = [&](LatentGroup g, const Tensor& latent) {
      const auto [x, y] = project_latent(latent);
      out.push_back({s.id, g, x, y});
    };
    push(LatentGroup::kRealA, gen_ab.extract_latent(a));
    push(LatentGroup::kFakeA, gen_ab.extract_latent(fake_a));
    push(LatentGroup::kRealB, gen_ba.extract_latent(b));
    push(LatentGroup::kFakeB, gen_ba.extract_latent(fake_b));
  }
  return out;
}

double histogram_overlap(const std::vector<std::pair<double, double>>& first,
                         const std::vector<std::pair<double, double>>& second) {
  if (first.empty() || second.empty()) throw std::invalid_argument("histogram_overlap: empty cloud");
  double lo_x = first[0].first, hi_x = lo_x, lo_y = first[0].second, hi_y = lo_y;
  for (const auto* cloud : {&first, &second}) {
    for (const auto& [x, y] : *cloud) {
      lo_x = std::min(lo_x, x);
      hi_x = std::max(hi_x, x);
      lo_y = std::min(lo_y, y);
      hi_y = std::max(hi_y, y);
    }
  }
  auto bin = [](double v, double lo, double hi) -> std::size_t {
    if (!(hi > lo)) return 0;
    const auto b = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * kOverlapBins));
    return std::min(b, kOverlapBins - 1);
  };
  auto histogram = [&](const std::vector<std::pair<double, double>>& cloud) {
    std::vector<std::uint64_t> h(kOverlapBins * kOverlapBins, 0);
    for (const auto& [x, y] : cloud) ++h[bin(x, lo_x, hi_x) * kOverlapBins + bin(y, lo_y, hi_y)];
    return h;
  };
  // Integer intersection of count_1/n_1 and count_2/n_2, exact for identical clouds.
  const auto h1 = histogram(first);
  const auto h2 = histogram(second);
  const std::uint64_t n1 = first.size();
  const std::uint64_t n2 = second.size();
  std::uint64_t shared = 0;
  for (std::size_t i = 0; i < h1.size(); ++i) shared += std::min(h1[i] * n2, h2[i] * n1);
  const double total = static_cast<double>(shared) / (static_cast<double>(n1) * static_cast<double>(n2));
  return std::clamp(total, 0.0, 1.0);
}

double cloud_diversity(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw std::invalid_argument("cloud_diversity: need at least two points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0;
  for (const auto& [x, y] : points) {
    vx += (x - mx) * (x - mx);
    vy += (y - my) * (y - my);
  }
  return (vx + vy) / (n - 1.0);
}

CloudSummary cloud_summary(const std::vector<LatentPoint>& points) {
  std::array<std::vector<std::pair<double, double>>, 4> groups;
  for (const auto& p : points) groups[static_cast<std::size_t>(p.group)].emplace_back(p.x, p.y);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) {
      throw std::invalid_argument("cloud_summary: group " + to_string(static_cast<LatentGroup>(g)) +
                                  " has fewer than two points");
    }
  }
  CloudSummary s;
  s.overlap_a = histogram_overlap(groups[static_cast<std::size_t>(LatentGroup::kRealA)],
                                  groups[static_cast<std::size_t>(LatentGroup::kFakeA)]);
  s.overlap_b = histogram_overlap(groups[static_cast<std::size_t>(LatentGroup::kRealB)],
                                  groups[static_cast<std::size_t>(LatentGroup::kFakeB)]);
  for (std::size_t g = 0; g < groups.size(); ++g) s.diversity[g] = cloud_diversity(groups[g]);
  return s;
}

}  // namespace fedcyc
