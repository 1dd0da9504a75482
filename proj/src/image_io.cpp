#include <png.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <stdexcept>

#include "fedcyc/data.hpp"

namespace fedcyc {

GrayImage read_png_gray(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    throw std::runtime_error("cannot read PNG " + path.string() + ": " + img.message);
  }
  const bool gray8 = (img.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_LINEAR)) == 0;
  if (!gray8) {
    png_image_free(&img);
    throw std::runtime_error("PNG " + path.string() + " is not 8-bit grayscale");
  }
  img.format = PNG_FORMAT_GRAY;
  GrayImage out;
  out.width = img.width;
  out.height = img.height;
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw std::runtime_error("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

void write_png_gray(const std::filesystem::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height) {
    throw std::invalid_argument("write_png_gray: pixel buffer does not match dimensions");
  }
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, image.pixels.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG " + path.string() + ": " + img.message);
  }
}

namespace {

std::map<std::string, std::filesystem::path> list_pngs(const std::filesystem::path& dir) {
  std::map<std::string, std::filesystem::path> out;
  if (!std::filesystem::is_directory(dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.emplace(entry.path().filename().string(), entry.path());
  }
  return out;
}

}  // namespace

std::vector<Sample> load_image_dir(const std::filesystem::path& dir, std::size_t image_size) {
  if (!std::filesystem::is_directory(dir)) throw std::runtime_error("image directory " + dir.string() + " not found");
  const auto files_a = list_pngs(dir / "modality_a");
  const auto files_b = list_pngs(dir / "modality_b");

  std::vector<std::string> orphans;
  for (const auto& [name, _] : files_a)
    if (!files_b.contains(name)) orphans.push_back("modality_a/" + name);
  for (const auto& [name, _] : files_b)
    if (!files_a.contains(name)) orphans.push_back("modality_b/" + name);
  if (!orphans.empty()) {
    std::string msg = "unmatched image files:";
    for (const auto& o : orphans) msg += " " + o;
    throw std::runtime_error(msg);
  }

  std::vector<Sample> out;
  int id = 0;
  for (const auto& [name, path_a] : files_a) {
    auto a = crop_and_resize(read_png_gray(path_a), image_size);
    auto b = crop_and_resize(read_png_gray(files_b.at(name)), image_size);
    out.push_back({id++, Tensor({1, image_size, image_size}, std::move(a)),
                   Tensor({1, image_size, image_size}, std::move(b))});
  }
  return out;
}

}  // namespace fedcyc
