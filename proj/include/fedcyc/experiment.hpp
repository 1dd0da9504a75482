#pragma once

#include <filesystem>
#include <vector>

#include "fedcyc/config.hpp"
#include "fedcyc/csv.hpp"
#include "fedcyc/data.hpp"
#include "fedcyc/federation.hpp"

namespace fedcyc {

// Train/test split and per-client datasets derived from a config.
struct PreparedData {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::vector<ClientDataset> clients;  // one entry for centralized modes
  std::vector<ManifestRow> manifest;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<MetricsRecord> metrics;
  std::vector<SummaryRow> summaries;
  std::size_t latent_points_per_eval = 0;
  std::filesystem::path output_dir;
};

// Trains the configured mode and writes into cfg.output_dir:
//   config_used.txt, manifest.csv, metrics.csv, summary.csv,
//   latent_round_<R>.csv per evaluation point, checkpoints/*.bin.
// Throws ConfigError for setup problems, NumericalError on divergence and
// std::runtime_error on I/O failures.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct ComparisonRow {
  Mode mode = Mode::kCentral;
  std::size_t epoch_budget = 0;
  MetricsRecord final_metrics;
};

// Runs `central` (epochs) and `fed_dp` (rounds x local_epochs) on the same
// data into <output_dir>/central and <output_dir>/fed_dp and writes
// <output_dir>/comparison.csv: mode,direction,epoch_budget,mae,psnr,ssim.
std::vector<ComparisonRow> compare_modes(const ExperimentConfig& cfg);

CsvTable comparison_table(const std::vector<ComparisonRow>& rows);

// Exit codes used by the command-line runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

}  // namespace fedcyc
