#include "fedcyc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fedcyc/errors.hpp"

namespace fedcyc {

namespace {

constexpr const char* kMagic = "fedcyc-params";

std::string dims_to_string(const Shape& shape) {
  if (shape.empty()) return "scalar";
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(shape[i]);
  }
  return out;
}

Shape parse_dims(const std::string& text) {
  Shape shape;
  if (text == "scalar") return shape;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    if (part.empty()) throw std::runtime_error("checkpoint: malformed shape '" + text + "'");
    shape.push_back(std::stoul(part));
  }
  return shape;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = __builtin_bswap64(v);
  }
  return v;
}

std::string expect_line(std::istream& is, const char* what) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(std::string("checkpoint: missing ") + what);
  return line;
}

}  // namespace

void write_checkpoint(std::ostream& os, const ParamVector& params) {
  const auto& entries = params.layout.entries();
  os << kMagic << " 1\n";
  os << "entries " << entries.size() << '\n';
  os << "total " << params.values.size() << '\n';
  for (const auto& e : entries) os << e.name << ' ' << dims_to_string(e.shape) << ' ' << e.offset << '\n';
  os << "data\n";
  for (double v : params.values) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
  }
}

ParamVector read_checkpoint(std::istream& is) {
  std::string tag;
  int version = 0;
  {
    std::istringstream first(expect_line(is, "header"));
    first >> tag >> version;
  }
  if (tag != kMagic || version != 1) throw std::runtime_error("checkpoint: unrecognized header");
  std::size_t n_entries = 0;
  std::size_t total = 0;
  {
    std::istringstream line(expect_line(is, "entry count"));
    line >> tag >> n_entries;
    if (tag != "entries") throw std::runtime_error("checkpoint: expected 'entries'");
  }
  {
    std::istringstream line(expect_line(is, "total"));
    line >> tag >> total;
    if (tag != "total") throw std::runtime_error("checkpoint: expected 'total'");
  }
  std::vector<std::pair<std::string, Shape>> shapes;
  std::vector<std::size_t> offsets;
  for (std::size_t i = 0; i < n_entries; ++i) {
    std::istringstream line(expect_line(is, "layout entry"));
    std::string name, dims;
    std::size_t offset = 0;
    if (!(line >> name >> dims >> offset)) throw std::runtime_error("checkpoint: malformed layout entry");
    shapes.emplace_back(name, parse_dims(dims));
    offsets.push_back(offset);
  }
  if (expect_line(is, "data marker") != "data") throw std::runtime_error("checkpoint: expected 'data'");

  ParamVector out{{}, ParamLayout::from_shapes(shapes)};
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    if (out.layout.entries()[i].offset != offsets[i]) {
      throw ShapeError("checkpoint: layout offsets are not contiguous at entry " + shapes[i].first);
    }
  }
  if (out.layout.total_size() != total) throw ShapeError("checkpoint: layout size disagrees with total");
  out.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    char buf[8];
    if (!is.read(buf, 8)) throw std::runtime_error("checkpoint: truncated data section");
    std::uint64_t bits = 0;
    std::memcpy(&bits, buf, 8);
    out.values[i] = std::bit_cast<double>(to_little_endian(bits));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const ParamVector& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(os, params);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

ParamVector load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace fedcyc
