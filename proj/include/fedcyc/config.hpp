#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fedcyc/data.hpp"
#include "fedcyc/federation.hpp"

namespace fedcyc {

enum class Mode { kCentral, kCentralDp, kFed, kFedDp };

std::string to_string(Mode mode);
Mode mode_from_string(const std::string& name);
inline bool is_federated(Mode m) { return m == Mode::kFed || m == Mode::kFedDp; }
inline bool uses_dp(Mode m) { return m == Mode::kCentralDp || m == Mode::kFedDp; }

enum class DatasetKind { kSynthetic, kImageDir };

enum class CheckpointPolicy { kAll, kFinal, kNone };

struct ExperimentConfig {
  Mode mode = Mode::kFedDp;

  DatasetKind dataset = DatasetKind::kSynthetic;
  std::size_t n_samples = 6000;
  // Synthetic-data seed; falls back to `seed` when unset.
  std::optional<std::uint64_t> data_seed;
  std::filesystem::path image_dir;
  double test_fraction = 0.2;

  PartitionScheme scheme = make_scheme(SchemeKind::kGradual, 4);
  double paired_ratio = 0.5;

  ModelConfig models;
  TrainingConfig training;

  std::size_t latent_samples = 400;
  CheckpointPolicy checkpoints = CheckpointPolicy::kAll;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  std::size_t image_size() const { return models.generator.image_size; }
  std::uint64_t effective_data_seed() const { return data_seed.value_or(seed); }
  // Checks cross-field invariants; throws ConfigError naming the key.
  void validate() const;
};

// Flat `key=value` document. Pairs are separated by whitespace or newlines;
// `#` starts a comment running to the end of the line. Unknown or repeated
// keys are rejected. Omitted keys keep their defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const ExperimentConfig& cfg);

}  // namespace fedcyc
