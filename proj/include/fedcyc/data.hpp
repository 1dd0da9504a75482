#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fedcyc/tensor.hpp"

namespace fedcyc {

// One subject seen in both modalities; images are [1,H,W] with values in [0,1].
struct Sample {
  int id = 0;
  Tensor modality_a;
  Tensor modality_b;
};

struct ImageRef {
  int sample_id = 0;
  Tensor image;
};

struct ClientDataset {
  std::vector<Sample> paired;
  // unpaired_a[i] and unpaired_b[i] never come from the same sample.
  std::vector<ImageRef> unpaired_a;
  std::vector<ImageRef> unpaired_b;

  std::size_t size() const { return paired.size() + unpaired_a.size(); }
};

enum class SchemeKind { kAverage, kGradual, kExtreme, kExplicit };

struct PartitionScheme {
  SchemeKind kind = SchemeKind::kAverage;
  std::vector<double> proportions;

  std::size_t n_clients() const { return proportions.size(); }
  void validate() const;
};

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

// Modality A is a clamped sum of 2-4 Gaussian blobs; modality B is a 3x3 box
// blur of (1 - A), averaging only the in-image neighbours at the border.
std::vector<Sample> synth_dataset(std::size_t n, std::size_t image_size, std::uint64_t seed);
// The modality-B transform on its own, [1,H,W] in and out.
Tensor synth_transform(const Tensor& modality_a);

// Named client-proportion tables; `average` works for any client count,
// `gradual` and `extreme` for 2, 4 and 8 clients.
PartitionScheme make_scheme(SchemeKind kind, std::size_t n_clients);
PartitionScheme make_explicit_scheme(std::vector<double> proportions);

// Per-client counts floor(p_k N) topped up by largest remainder (ties go to
// the lower client index) so they sum to N.
std::vector<std::size_t> partition_sizes(const PartitionScheme& scheme, std::size_t n);

// Disjoint, exhaustive assignment of sample ids to clients.
std::vector<std::vector<int>> partition(const std::vector<int>& sample_ids, const PartitionScheme& scheme,
                                        std::uint64_t seed);

// round(ratio * m) samples stay paired; the rest keep their A images while
// their B images are rearranged by a seeded derangement.
ClientDataset split_paired_unpaired(const std::vector<Sample>& client_samples, double paired_ratio,
                                    std::uint64_t seed);

// Reads <dir>/modality_a/*.png and <dir>/modality_b/*.png (8-bit grayscale,
// matched by filename), center-crops to a square and bilinearly resizes to
// image_size. Samples are ordered by filename and numbered from 0.
std::vector<Sample> load_image_dir(const std::filesystem::path& dir, std::size_t image_size);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

GrayImage read_png_gray(const std::filesystem::path& path);
void write_png_gray(const std::filesystem::path& path, const GrayImage& image);

// Center square crop followed by bilinear resampling (half-pixel centers).
std::vector<double> crop_and_resize(const GrayImage& image, std::size_t size);

}  // namespace fedcyc
