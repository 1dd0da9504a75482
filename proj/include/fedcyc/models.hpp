#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedcyc/params.hpp"
#include "fedcyc/tensor.hpp"

namespace fedcyc {

struct GeneratorConfig {
  std::size_t image_size = 32;
  std::vector<std::size_t> channels{8, 16, 32};
  // 1-based encoder block whose activation is the latent tap; values past the
  // deepest block are clamped to it.
  std::size_t latent_tap_index = 5;
  double init_std = 0.02;

  std::size_t depth() const { return channels.size(); }
  void validate() const;
};

struct DiscriminatorConfig {
  std::size_t image_size = 32;
  // Hidden stride-2 blocks; a final stride-2 conv maps to one logit channel.
  std::vector<std::size_t> channels{16, 32};
  double init_std = 0.02;

  std::size_t depth() const { return channels.size() + 1; }
  void validate() const;
};

struct ConvLayer {
  Tensor weight;
  Tensor bias;
};

// U-Net style translator: stride-2 4x4 encoder convs with LeakyReLU(0.2),
// decoder blocks of nearest x2 upsample + 3x3 conv + ReLU with additive skips
// from the encoder activation of matching resolution, and a 3x3 output conv
// followed by tanh.
class Generator {
 public:
  Generator(GeneratorConfig config, std::uint64_t seed);
  // Copies own independent parameter storage.
  Generator(const Generator& other);
  Generator& operator=(const Generator& other);
  Generator(Generator&&) noexcept = default;
  Generator& operator=(Generator&&) noexcept = default;

  const GeneratorConfig& config() const { return config_; }

  // image: [1,H,W] or [N,1,H,W] with H == W == image_size.
  Tensor forward(const Tensor& image) const;
  // Activation of encoder block min(latent_tap_index, depth).
  Tensor extract_latent(const Tensor& image) const;

  std::vector<NamedTensor> parameters() const;
  void zero_grad();

 private:
  void check_input(const Tensor& image) const;

  GeneratorConfig config_;
  std::vector<ConvLayer> encoder_;
  std::vector<ConvLayer> decoder_;
  ConvLayer output_;
};

// Patch discriminator producing raw least-squares logits.
class Discriminator {
 public:
  Discriminator(DiscriminatorConfig config, std::uint64_t seed);
  Discriminator(const Discriminator& other);
  Discriminator& operator=(const Discriminator& other);
  Discriminator(Discriminator&&) noexcept = default;
  Discriminator& operator=(Discriminator&&) noexcept = default;

  const DiscriminatorConfig& config() const { return config_; }
  // image: [1,H,W] or [N,1,H,W]; returns [1,h,w] / [N,1,h,w] with h = H / 2^depth.
  Tensor forward(const Tensor& image) const;

  std::vector<NamedTensor> parameters() const;
  void zero_grad();

 private:
  DiscriminatorConfig config_;
  std::vector<ConvLayer> layers_;
};

}  // namespace fedcyc
