#include "fedcyc/models.hpp"

#include <algorithm>

#include "fedcyc/errors.hpp"
#include "fedcyc/ops.hpp"
#include "fedcyc/rng.hpp"

namespace fedcyc {

namespace {

ConvLayer make_conv(std::size_t c_out, std::size_t c_in, std::size_t k, double init_std, SeededRng& rng) {
  std::vector<double> w(c_out * c_in * k * k);
  for (double& v : w) v = rng.normal(0.0, init_std);
  return {Tensor({c_out, c_in, k, k}, std::move(w), true), Tensor::zeros({c_out}, true)};
}

ConvLayer clone_layer(const ConvLayer& l) {
  Tensor w = l.weight.detach();
  Tensor b = l.bias.detach();
  return {Tensor(w.shape(), {w.data().begin(), w.data().end()}, true),
          Tensor(b.shape(), {b.data().begin(), b.data().end()}, true)};
}

void push_layer(std::vector<NamedTensor>& out, const std::string& prefix, const ConvLayer& l) {
  out.push_back({prefix + ".weight", l.weight});
  out.push_back({prefix + ".bias", l.bias});
}

Tensor apply(const ConvLayer& l, const Tensor& x, int stride, int padding) {
  return ops::conv2d(x, l.weight, stride, padding, l.bias);
}

void check_image(const Tensor& image, std::size_t size, const char* who) {
  const auto& s = image.shape();
  const bool ok3 = s.size() == 3 && s[0] == 1 && s[1] == size && s[2] == size;
  const bool ok4 = s.size() == 4 && s[1] == 1 && s[2] == size && s[3] == size;
  if (!ok3 && !ok4) {
    throw ShapeError(std::string(who) + ": expected image [1," + std::to_string(size) + "," + std::to_string(size) +
                     "] (optionally batched), got " + shape_to_string(s));
  }
}

}  // namespace

void GeneratorConfig::validate() const {
  if (channels.empty()) throw ShapeError("generator needs at least one encoder block");
  if (std::any_of(channels.begin(), channels.end(), [](std::size_t c) { return c == 0; })) {
    throw ShapeError("generator channel widths must be positive");
  }
  const std::size_t factor = std::size_t{1} << depth();
  if (image_size == 0 || image_size % factor != 0) {
    throw ShapeError("image_size " + std::to_string(image_size) + " not divisible by 2^" + std::to_string(depth()));
  }
  if (latent_tap_index == 0) throw ShapeError("latent_tap_index is 1-based");
}

void DiscriminatorConfig::validate() const {
  if (std::any_of(channels.begin(), channels.end(), [](std::size_t c) { return c == 0; })) {
    throw ShapeError("discriminator channel widths must be positive");
  }
  const std::size_t factor = std::size_t{1} << depth();
  if (image_size == 0 || image_size % factor != 0) {
    throw ShapeError("image_size " + std::to_string(image_size) + " not divisible by 2^" + std::to_string(depth()));
  }
}

Generator::Generator(GeneratorConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  SeededRng rng(seed);
  const auto& ch = config_.channels;
  std::size_t in = 1;
  for (std::size_t c : ch) {
    encoder_.push_back(make_conv(c, in, 4, config_.init_std, rng));
    in = c;
  }
  // Decoder block i lands on the resolution of encoder block depth-2-i; the
  // last block returns to full resolution with ch[0] channels.
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const std::size_t level = ch.size() - 1 - i;
    const std::size_t out = level == 0 ? ch[0] : ch[level - 1];
    decoder_.push_back(make_conv(out, in, 3, config_.init_std, rng));
    in = out;
  }
  output_ = make_conv(1, in, 3, config_.init_std, rng);
}

void Generator::check_input(const Tensor& image) const { check_image(image, config_.image_size, "generator"); }

Tensor Generator::forward(const Tensor& image) const {
  check_input(image);
  std::vector<Tensor> skips;
  Tensor h = image;
  for (const auto& layer : encoder_) {
    h = ops::leaky_relu(apply(layer, h, 2, 1), 0.2);
    skips.push_back(h);
  }
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    h = ops::relu(apply(decoder_[i], ops::upsample2x(h), 1, 1));
    const std::size_t level = decoder_.size() - 1 - i;
    if (level > 0) h = ops::add(h, skips[level - 1]);
  }
  return ops::tanh(apply(output_, h, 1, 1));
}

Tensor Generator::extract_latent(const Tensor& image) const {
  check_input(image);
  const std::size_t tap = std::clamp<std::size_t>(config_.latent_tap_index, 1, encoder_.size());
  Tensor h = image;
  for (std::size_t i = 0; i < tap; ++i) h = ops::leaky_relu(apply(encoder_[i], h, 2, 1), 0.2);
  return h;
}

std::vector<NamedTensor> Generator::parameters() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < encoder_.size(); ++i) push_layer(out, "enc" + std::to_string(i), encoder_[i]);
  for (std::size_t i = 0; i < decoder_.size(); ++i) push_layer(out, "dec" + std::to_string(i), decoder_[i]);
  push_layer(out, "out", output_);
  return out;
}

void Generator::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

Generator::Generator(const Generator& other) : config_(other.config_), output_(clone_layer(other.output_)) {
  for (const auto& l : other.encoder_) encoder_.push_back(clone_layer(l));
  for (const auto& l : other.decoder_) decoder_.push_back(clone_layer(l));
}

Generator& Generator::operator=(const Generator& other) {
  if (this != &other) *this = Generator(other);
  return *this;
}

Discriminator::Discriminator(DiscriminatorConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  SeededRng rng(seed);
  std::size_t in = 1;
  for (std::size_t c : config_.channels) {
    layers_.push_back(make_conv(c, in, 4, config_.init_std, rng));
    in = c;
  }
  layers_.push_back(make_conv(1, in, 4, config_.init_std, rng));
}

Tensor Discriminator::forward(const Tensor& image) const {
  check_image(image, config_.image_size, "discriminator");
  Tensor h = image;
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) h = ops::leaky_relu(apply(layers_[i], h, 2, 1), 0.2);
  return apply(layers_.back(), h, 2, 1);
}

std::vector<NamedTensor> Discriminator::parameters() const {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) push_layer(out, "conv" + std::to_string(i), layers_[i]);
  return out;
}

void Discriminator::zero_grad() {
  for (auto& p : parameters()) p.tensor.zero_grad();
}

Discriminator::Discriminator(const Discriminator& other) : config_(other.config_) {
  for (const auto& l : other.layers_) layers_.push_back(clone_layer(l));
}

Discriminator& Discriminator::operator=(const Discriminator& other) {
  if (this != &other) *this = Discriminator(other);
  return *this;
}

}  // namespace fedcyc
