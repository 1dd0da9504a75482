#include "fedcyc/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fedcyc/rng.hpp"

namespace fedcyc {

namespace {

constexpr double kSumTolerance = 1e-9;

}  // namespace

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kAverage: return "average";
    case SchemeKind::kGradual: return "gradual";
    case SchemeKind::kExtreme: return "extreme";
    case SchemeKind::kExplicit: return "explicit";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
  if (name == "average") return SchemeKind::kAverage;
  if (name == "gradual") return SchemeKind::kGradual;
  if (name == "extreme") return SchemeKind::kExtreme;
  if (name == "explicit") return SchemeKind::kExplicit;
  throw std::invalid_argument("unknown partition scheme '" + name + "'");
}

void PartitionScheme::validate() const {
  if (proportions.empty()) throw std::invalid_argument("partition scheme has no clients");
  double total = 0.0;
  for (double p : proportions) {
    if (!(p > 0.0)) throw std::invalid_argument("partition proportions must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw std::invalid_argument("partition proportions sum to " + std::to_string(total) + ", expected 1");
  }
}

Tensor synth_transform(const Tensor& modality_a) {
  const auto& s = modality_a.shape();
  if (s.size() != 3 || s[0] != 1) throw std::invalid_argument("synth_transform expects a [1,H,W] image");
  const std::size_t h = s[1];
  const std::size_t w = s[2];
  const auto a = modality_a.data();
  std::vector<double> out(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      double total = 0.0;
      int count = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const long yy = static_cast<long>(y) + dy;
          const long xx = static_cast<long>(x) + dx;
          if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(w)) continue;
          total += 1.0 - a[static_cast<std::size_t>(yy) * w + static_cast<std::size_t>(xx)];
          ++count;
        }
      }
      out[y * w + x] = total / count;
    }
  }
  return Tensor({1, h, w}, std::move(out));
}

std::vector<Sample> synth_dataset(std::size_t n, std::size_t image_size, std::uint64_t seed) {
  if (image_size == 0) throw std::invalid_argument("synth_dataset: image_size must be positive");
  std::vector<Sample> out;
  out.reserve(n);
  const double size = static_cast<double>(image_size);
  for (std::size_t i = 0; i < n; ++i) {
    SeededRng rng(derive_seed(seed, {tag(Stream::kSynthetic), i}));
    const int blobs = 2 + static_cast<int>(rng.uniform_index(3));
    std::vector<double> a(image_size * image_size, 0.0);
    for (int b = 0; b < blobs; ++b) {
      const double cx = rng.uniform(0.0, size);
      const double cy = rng.uniform(0.0, size);
      const double sigma = rng.uniform(size / 16.0, size / 5.0);
      const double amp = rng.uniform(0.5, 1.0);
      for (std::size_t y = 0; y < image_size; ++y) {
        for (std::size_t x = 0; x < image_size; ++x) {
          const double dx = static_cast<double>(x) + 0.5 - cx;
          const double dy = static_cast<double>(y) + 0.5 - cy;
          a[y * image_size + x] += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
        }
      }
    }
    for (double& v : a) v = std::clamp(v, 0.0, 1.0);
    Tensor ta({1, image_size, image_size}, std::move(a));
    Tensor tb = synth_transform(ta);
    out.push_back({static_cast<int>(i), ta, tb});
  }
  return out;
}

PartitionScheme make_explicit_scheme(std::vector<double> proportions) {
  PartitionScheme s{SchemeKind::kExplicit, std::move(proportions)};
  s.validate();
  return s;
}

PartitionScheme make_scheme(SchemeKind kind, std::size_t n_clients) {
  PartitionScheme s{kind, {}};
  switch (kind) {
    case SchemeKind::kAverage:
      if (n_clients == 0) throw std::invalid_argument("average scheme needs at least one client");
      s.proportions.assign(n_clients, 1.0 / static_cast<double>(n_clients));
      break;
    case SchemeKind::kGradual:
      if (n_clients == 2) s.proportions = {0.6, 0.4};
      else if (n_clients == 4) s.proportions = {0.4, 0.3, 0.2, 0.1};
      else if (n_clients == 8) s.proportions = {0.3, 0.2, 0.1, 0.1, 0.1, 0.1, 0.05, 0.05};
      break;
    case SchemeKind::kExtreme:
      if (n_clients == 2) s.proportions = {0.9, 0.1};
      else if (n_clients == 4) s.proportions = {0.7, 0.1, 0.1, 0.1};
      else if (n_clients == 8) s.proportions = {0.3, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
      break;
    case SchemeKind::kExplicit:
      throw std::invalid_argument("explicit schemes need proportions; use make_explicit_scheme");
  }
  if (s.proportions.empty()) {
    throw std::invalid_argument(to_string(kind) + " scheme is defined for 2, 4 or 8 clients, not " +
                                std::to_string(n_clients));
  }
  s.validate();
  return s;
}

std::vector<std::size_t> partition_sizes(const PartitionScheme& scheme, std::size_t n) {
  scheme.validate();
  const std::size_t k = scheme.n_clients();
  std::vector<std::size_t> sizes(k);
  std::vector<double> remainder(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double exact = scheme.proportions[i] * static_cast<double>(n);
    // Guard against 0.3*10 = 2.9999999999999996 style underflow.
    const double fl = std::floor(exact + 1e-9);
    sizes[i] = static_cast<std::size_t>(fl);
    remainder[i] = exact - fl;
    assigned += sizes[i];
  }
  if (assigned > n) throw std::logic_error("partition_sizes: floor counts exceed N");
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++sizes[order[i % k]];
  return sizes;
}

std::vector<std::vector<int>> partition(const std::vector<int>& sample_ids, const PartitionScheme& scheme,
                                        std::uint64_t seed) {
  if (sample_ids.size() < scheme.n_clients()) {
    throw std::invalid_argument("partition: " + std::to_string(sample_ids.size()) + " samples cannot cover " +
                                std::to_string(scheme.n_clients()) + " clients");
  }
  const auto sizes = partition_sizes(scheme, sample_ids.size());
  std::vector<int> ids = sample_ids;
  SeededRng rng(derive_seed(seed, {tag(Stream::kPartition)}));
  rng.shuffle(ids);
  std::vector<std::vector<int>> out(sizes.size());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    out[k].assign(ids.begin() + static_cast<std::ptrdiff_t>(cursor),
                  ids.begin() + static_cast<std::ptrdiff_t>(cursor + sizes[k]));
    cursor += sizes[k];
  }
  return out;
}

ClientDataset split_paired_unpaired(const std::vector<Sample>& client_samples, double paired_ratio,
                                    std::uint64_t seed) {
  if (!(paired_ratio >= 0.0 && paired_ratio <= 1.0)) {
    throw std::invalid_argument("paired_ratio must lie in [0, 1]");
  }
  SeededRng rng(derive_seed(seed, {tag(Stream::kPairing)}));
  std::vector<std::size_t> order(client_samples.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const auto n_paired = static_cast<std::size_t>(std::llround(paired_ratio * static_cast<double>(order.size())));

  ClientDataset out;
  for (std::size_t i = 0; i < n_paired; ++i) out.paired.push_back(client_samples[order[i]]);

  const std::size_t m = order.size() - n_paired;
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  if (m >= 2) {
    // Swapping a fixed point with any other slot removes it without creating a new one.
    for (std::size_t i = 0; i < m; ++i) {
      if (perm[i] == i) std::swap(perm[i], perm[(i + 1) % m]);
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const Sample& sa = client_samples[order[n_paired + i]];
    const Sample& sb = client_samples[order[n_paired + perm[i]]];
    out.unpaired_a.push_back({sa.id, sa.modality_a});
    out.unpaired_b.push_back({sb.id, sb.modality_b});
  }
  return out;
}

std::vector<double> crop_and_resize(const GrayImage& image, std::size_t size) {
  if (image.width == 0 || image.height == 0) throw std::invalid_argument("crop_and_resize: empty image");
  if (size == 0) throw std::invalid_argument("crop_and_resize: target size must be positive");
  const std::size_t side = std::min(image.width, image.height);
  const std::size_t x0 = (image.width - side) / 2;
  const std::size_t y0 = (image.height - side) / 2;
  auto px = [&](std::size_t y, std::size_t x) {
    return static_cast<double>(image.pixels[(y0 + y) * image.width + x0 + x]) / 255.0;
  };
  std::vector<double> out(size * size);
  if (side == size) {
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) out[y * size + x] = px(y, x);
    return out;
  }
  const double scale = static_cast<double>(side) / static_cast<double>(size);
  const double max_coord = static_cast<double>(side - 1);
  for (std::size_t y = 0; y < size; ++y) {
    const double sy = std::clamp((static_cast<double>(y) + 0.5) * scale - 0.5, 0.0, max_coord);
    const auto y_lo = static_cast<std::size_t>(std::floor(sy));
    const std::size_t y_hi = std::min(y_lo + 1, side - 1);
    const double fy = sy - static_cast<double>(y_lo);
    for (std::size_t x = 0; x < size; ++x) {
      const double sx = std::clamp((static_cast<double>(x) + 0.5) * scale - 0.5, 0.0, max_coord);
      const auto x_lo = static_cast<std::size_t>(std::floor(sx));
      const std::size_t x_hi = std::min(x_lo + 1, side - 1);
      const double fx = sx - static_cast<double>(x_lo);
      const double top = px(y_lo, x_lo) + fx * (px(y_lo, x_hi) - px(y_lo, x_lo));
      const double bottom = px(y_hi, x_lo) + fx * (px(y_hi, x_hi) - px(y_hi, x_lo));
      out[y * size + x] = top + fy * (bottom - top);
    }
  }
  return out;
}

}  // namespace fedcyc
