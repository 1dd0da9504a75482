#include "fedcyc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fedcyc/checkpoint.hpp"
#include "fedcyc/diagnostics.hpp"
#include "fedcyc/errors.hpp"
#include "fedcyc/rng.hpp"

namespace fedcyc {

namespace {

namespace fs = std::filesystem;

std::vector<Sample> load_samples(const ExperimentConfig& cfg) {
  if (cfg.dataset == DatasetKind::kSynthetic) {
    return synth_dataset(cfg.n_samples, cfg.image_size(), cfg.effective_data_seed());
  }
  return load_image_dir(cfg.image_dir, cfg.image_size());
}

class OutputWriter {
 public:
  OutputWriter(const ExperimentConfig& cfg, fs::path dir) : cfg_(cfg), dir_(std::move(dir)) {
    fs::create_directories(dir_);
    if (cfg_.checkpoints != CheckpointPolicy::kNone) fs::create_directories(dir_ / "checkpoints");
  }

  // Latent cloud, summary row and (per policy) checkpoints for one evaluation point.
  void evaluation_point(int index, const Generator& gen_ab, const Generator& gen_ba,
                        const std::vector<Sample>& test, bool last) {
    SeededRng rng(derive_seed(cfg_.seed, {tag(Stream::kLatent), static_cast<std::uint64_t>(index)}));
    const auto cloud = latent_cloud(gen_ab, gen_ba, test, cfg_.latent_samples, rng);
    for (const auto& p : cloud) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw NumericalError("non-finite latent coordinate at evaluation point " + std::to_string(index));
      }
    }
    points_per_eval_ = cloud.size();
    write_csv_file(dir_ / ("latent_round_" + std::to_string(index) + ".csv"), latent_table(cloud));
    summaries_.push_back({index, cloud_summary(cloud)});
    const bool save = cfg_.checkpoints == CheckpointPolicy::kAll || (cfg_.checkpoints == CheckpointPolicy::kFinal && last);
    if (save) {
      const std::string suffix = "_round_" + std::to_string(index) + ".bin";
      save_checkpoint(dir_ / "checkpoints" / ("gen_AB" + suffix), flatten_params(gen_ab));
      save_checkpoint(dir_ / "checkpoints" / ("gen_BA" + suffix), flatten_params(gen_ba));
    }
  }

  ExperimentResult finish(std::vector<MetricsRecord> metrics, const std::vector<ManifestRow>& manifest) {
    write_csv_file(dir_ / "metrics.csv", metrics_table(metrics));
    write_csv_file(dir_ / "summary.csv", summary_table(summaries_));
    write_csv_file(dir_ / "manifest.csv", manifest_table(manifest));
    return {std::move(metrics), summaries_, points_per_eval_, dir_};
  }

  void write_config() {
    std::ofstream os(dir_ / "config_used.txt");
    os << to_config_text(cfg_);
    if (!os) throw std::runtime_error("failed writing " + (dir_ / "config_used.txt").string());
  }

 private:
  const ExperimentConfig& cfg_;
  fs::path dir_;
  std::vector<SummaryRow> summaries_;
  std::size_t points_per_eval_ = 0;
};

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<Sample> samples = load_samples(cfg);
  if (samples.size() < 2) throw ConfigError("config key 'n_samples': need at least two samples");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  SeededRng split_rng(derive_seed(cfg.seed, {tag(Stream::kSplit)}));
  split_rng.shuffle(order);
  auto n_test = static_cast<std::size_t>(std::llround(cfg.test_fraction * static_cast<double>(samples.size())));
  n_test = std::clamp<std::size_t>(n_test, 1, samples.size() - 1);

  PreparedData out;
  const std::size_t n_train = samples.size() - n_test;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (i < n_train ? out.train : out.test).push_back(samples[order[i]]);
  }

  const PartitionScheme scheme = is_federated(cfg.mode) ? cfg.scheme : make_explicit_scheme({1.0});
  std::vector<int> train_ids;
  std::vector<const Sample*> by_id(samples.size(), nullptr);
  for (const auto& s : out.train) {
    train_ids.push_back(s.id);
    by_id[static_cast<std::size_t>(s.id)] = &s;
  }
  if (train_ids.size() < scheme.n_clients()) {
    throw ConfigError("config key 'n_clients': " + std::to_string(train_ids.size()) +
                      " training samples cannot cover " + std::to_string(scheme.n_clients()) + " clients");
  }
  const auto parts = partition(train_ids, scheme, cfg.seed);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k].empty()) {
      throw ConfigError("config key 'proportions': client " + std::to_string(k) + " receives no samples");
    }
    std::vector<Sample> client_samples;
    for (int id : parts[k]) client_samples.push_back(*by_id[static_cast<std::size_t>(id)]);
    ClientDataset ds = split_paired_unpaired(client_samples, cfg.paired_ratio, derive_seed(cfg.seed, {k}));
    for (const auto& s : ds.paired) out.manifest.push_back({s.id, static_cast<int>(k), true});
    for (const auto& r : ds.unpaired_a) out.manifest.push_back({r.sample_id, static_cast<int>(k), false});
    out.clients.push_back(std::move(ds));
  }
  for (const auto& s : out.test) out.manifest.push_back({s.id, -1, false});
  std::sort(out.manifest.begin(), out.manifest.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.sample_id < b.sample_id; });
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  PreparedData data = prepare_data(cfg);
  OutputWriter writer(cfg, cfg.output_dir);
  writer.write_config();

  TrainingConfig training = cfg.training;
  training.dp.enabled = uses_dp(cfg.mode);

  if (!is_federated(cfg.mode)) {
    const std::size_t epochs = training.central_epochs;
    const auto result = train_centralized(data.clients.front(), data.test, cfg.models, training, epochs, cfg.seed,
                                          [&](int epoch, const GanModels& m) {
                                            writer.evaluation_point(epoch, m.gen_ab, m.gen_ba, data.test,
                                                                    static_cast<std::size_t>(epoch) == epochs);
                                          });
    return writer.finish(result.metrics, data.manifest);
  }

  ServerState server = make_server(cfg.models, cfg.seed);
  std::vector<ClientState> clients;
  const double total = static_cast<double>(data.train.size());
  for (std::size_t k = 0; k < data.clients.size(); ++k) {
    const double weight = static_cast<double>(data.clients[k].size()) / total;
    clients.push_back(make_client(static_cast<int>(k), cfg.models, std::move(data.clients[k]), weight, cfg.seed));
  }
  std::vector<MetricsRecord> metrics;
  for (std::size_t r = 0; r < training.rounds; ++r) {
    RoundResult round;
    try {
      round = run_round(server, clients, training, data.test, cfg.seed);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " in round " + std::to_string(r + 1));
    }
    metrics.insert(metrics.end(), round.metrics.begin(), round.metrics.end());
    writer.evaluation_point(server.round, server.gen_ab, server.gen_ba, data.test, r + 1 == training.rounds);
  }
  return writer.finish(std::move(metrics), data.manifest);
}

CsvTable comparison_table(const std::vector<ComparisonRow>& rows) {
  CsvTable t{{"mode", "direction", "epoch_budget", "mae", "psnr", "ssim"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({to_string(r.mode), r.final_metrics.direction, std::to_string(r.epoch_budget),
                      format_double(r.final_metrics.mae), format_double(r.final_metrics.psnr),
                      format_double(r.final_metrics.ssim)});
  }
  return t;
}

std::vector<ComparisonRow> compare_modes(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ComparisonRow> rows;
  for (Mode mode : {Mode::kCentral, Mode::kFedDp}) {
    ExperimentConfig sub = cfg;
    sub.mode = mode;
    sub.training.dp.enabled = uses_dp(mode);
    sub.output_dir = cfg.output_dir / to_string(mode);
    const ExperimentResult result = run_experiment(sub);
    const std::size_t budget = is_federated(mode) ? cfg.training.rounds * cfg.training.local_epochs
                                                  : cfg.training.central_epochs;
    // Final evaluation point: last two records, one per direction.
    const auto& m = result.metrics;
    if (m.size() < 2) throw std::runtime_error("compare_modes: " + to_string(mode) + " produced no metrics");
    rows.push_back({mode, budget, m[m.size() - 2]});
    rows.push_back({mode, budget, m[m.size() - 1]});
  }
  write_csv_file(cfg.output_dir / "comparison.csv", comparison_table(rows));
  return rows;
}

}  // namespace fedcyc
