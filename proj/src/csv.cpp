#include "fedcyc/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fedcyc {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void require_header(const CsvTable& t, const std::vector<std::string>& expected, const char* what) {
  if (t.header != expected) throw std::runtime_error(std::string(what) + ": unexpected CSV header");
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("CSV has no column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("CSV: missing header");
  t.header = split_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split_line(line);
    if (row.size() != t.header.size()) {
      throw std::runtime_error("CSV: row has " + std::to_string(row.size()) + " fields, header has " +
                               std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_csv(is);
}

void write_csv(std::ostream& os, const CsvTable& table) {
  auto put = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << row[i];
    }
    os << '\n';
  };
  put(table.header);
  for (const auto& r : table.rows) put(r);
}

void write_csv_file(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(os, table);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

long parse_int(const std::string& text) {
  long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not an integer: '" + text + "'");
  }
  return v;
}

CsvTable metrics_table(const std::vector<MetricsRecord>& records) {
  CsvTable t{{"round_or_epoch", "direction", "mae", "psnr", "ssim"}, {}};
  for (const auto& r : records) {
    t.rows.push_back({std::to_string(r.round), r.direction, format_double(r.mae), format_double(r.psnr),
                      format_double(r.ssim)});
  }
  return t;
}

std::vector<MetricsRecord> parse_metrics(const CsvTable& t) {
  require_header(t, metrics_table({}).header, "metrics");
  std::vector<MetricsRecord> out;
  for (const auto& r : t.rows) {
    out.push_back({static_cast<int>(parse_int(r[0])), r[1], parse_double(r[2]), parse_double(r[3]),
                   parse_double(r[4])});
  }
  return out;
}

CsvTable latent_table(const std::vector<LatentPoint>& points) {
  CsvTable t{{"sample_id", "group", "x", "y"}, {}};
  for (const auto& p : points) {
    t.rows.push_back({std::to_string(p.sample_id), to_string(p.group), format_double(p.x), format_double(p.y)});
  }
  return t;
}

std::vector<LatentPoint> parse_latent(const CsvTable& t) {
  require_header(t, latent_table({}).header, "latent");
  std::vector<LatentPoint> out;
  for (const auto& r : t.rows) {
    out.push_back({static_cast<int>(parse_int(r[0])), latent_group_from_string(r[1]), parse_double(r[2]),
                   parse_double(r[3])});
  }
  return out;
}

CsvTable summary_table(const std::vector<SummaryRow>& rows) {
  CsvTable t{{"round_or_epoch", "overlap_A", "overlap_B", "diversity_realA", "diversity_fakeA", "diversity_realB",
              "diversity_fakeB"},
             {}};
  for (const auto& r : rows) {
    const auto& d = r.summary.diversity;
    t.rows.push_back({std::to_string(r.round), format_double(r.summary.overlap_a), format_double(r.summary.overlap_b),
                      format_double(d[0]), format_double(d[1]), format_double(d[2]), format_double(d[3])});
  }
  return t;
}

std::vector<SummaryRow> parse_summary(const CsvTable& t) {
  require_header(t, summary_table({}).header, "summary");
  std::vector<SummaryRow> out;
  for (const auto& r : t.rows) {
    SummaryRow row;
    row.round = static_cast<int>(parse_int(r[0]));
    row.summary.overlap_a = parse_double(r[1]);
    row.summary.overlap_b = parse_double(r[2]);
    for (std::size_t g = 0; g < 4; ++g) row.summary.diversity[g] = parse_double(r[3 + g]);
    out.push_back(row);
  }
  return out;
}

CsvTable manifest_table(const std::vector<ManifestRow>& rows) {
  CsvTable t{{"sample_id", "client_id", "paired"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.sample_id), std::to_string(r.client_id), r.paired ? "1" : "0"});
  }
  return t;
}

std::vector<ManifestRow> parse_manifest(const CsvTable& t) {
  require_header(t, manifest_table({}).header, "manifest");
  std::vector<ManifestRow> out;
  for (const auto& r : t.rows) {
    out.push_back({static_cast<int>(parse_int(r[0])), static_cast<int>(parse_int(r[1])), parse_int(r[2]) != 0});
  }
  return out;
}

}  // namespace fedcyc
