#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "fedcyc/diagnostics.hpp"
#include "fedcyc/metrics.hpp"

namespace fedcyc {

// Plain comma-separated table: no quoting, fields never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& is);
CsvTable read_csv_file(const std::filesystem::path& path);
void write_csv(std::ostream& os, const CsvTable& table);
void write_csv_file(const std::filesystem::path& path, const CsvTable& table);

// Shortest text that parses back to the identical double.
std::string format_double(double value);
double parse_double(const std::string& text);
long parse_int(const std::string& text);

struct SummaryRow {
  int round = 0;
  CloudSummary summary;
};

struct ManifestRow {
  int sample_id = 0;
  int client_id = 0;  // -1 marks the held-out test set
  bool paired = false;
};

// metrics.csv: round_or_epoch,direction,mae,psnr,ssim
CsvTable metrics_table(const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> parse_metrics(const CsvTable& table);

// latent_round_R.csv: sample_id,group,x,y
CsvTable latent_table(const std::vector<LatentPoint>& points);
std::vector<LatentPoint> parse_latent(const CsvTable& table);

// summary.csv: round_or_epoch,overlap_A,overlap_B,diversity_realA,diversity_fakeA,diversity_realB,diversity_fakeB
CsvTable summary_table(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary(const CsvTable& table);

// manifest.csv: sample_id,client_id,paired
CsvTable manifest_table(const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> parse_manifest(const CsvTable& table);

}  // namespace fedcyc
