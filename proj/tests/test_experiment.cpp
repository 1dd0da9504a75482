#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fedcyc/checkpoint.hpp"
#include "fedcyc/config.hpp"
#include "fedcyc/csv.hpp"
#include "fedcyc/errors.hpp"
#include "fedcyc/experiment.hpp"

namespace fedcyc {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fedcyc_exp_" + name);
  fs::remove_all(p);
  return p;
}

const char* kTiny =
    "dataset=synthetic n_samples=30 image_size=16 gen_channels=4,8 disc_channels=4\n"
    "rounds=2 local_epochs=1 epochs=2 batch_size=4 latent_samples=400\n"
    "scheme=gradual n_clients=2 seed=3\n";

TEST(Config, EmptyDocumentGivesDefaults) {
  const ExperimentConfig c = parse_config("");
  EXPECT_EQ(c.mode, Mode::kFedDp);
  EXPECT_EQ(c.training.rounds, 10u);
  EXPECT_EQ(c.training.local_epochs, 3u);
  EXPECT_EQ(c.training.central_epochs, 30u);
  EXPECT_EQ(c.training.rounds * c.training.local_epochs, c.training.central_epochs);
  EXPECT_EQ(c.paired_ratio, 0.5);
  EXPECT_TRUE(c.training.dp.enabled);
  EXPECT_EQ(c.training.dp.clip_bound, 1.0);
  EXPECT_EQ(c.training.dp.noise_multiplier, 1.0);
  EXPECT_EQ(c.scheme.proportions, (std::vector<double>{0.4, 0.3, 0.2, 0.1}));
}

TEST(Config, ParsesKeysAndComments) {
  const ExperimentConfig c = parse_config(
      "mode=central epochs=30  # centralized\n"
      "scheme=explicit proportions=0.5,0.25,0.25\n gen_channels=8,16 disc_channels=8 image_size=16\n");
  EXPECT_EQ(c.mode, Mode::kCentral);
  EXPECT_FALSE(c.training.dp.enabled);
  EXPECT_EQ(c.training.central_epochs, 30u);
  EXPECT_EQ(c.scheme.proportions, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_EQ(c.models.generator.channels, (std::vector<std::size_t>{8, 16}));
}

void expect_config_error(const std::string& text, const std::string& key) {
  try {
    parse_config(text);
    FAIL() << "accepted: " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'" + key + "'"), std::string::npos) << e.what();
  }
}

TEST(Config, RejectionsNameTheKey) {
  expect_config_error("paired_ratio=1.5", "paired_ratio");
  expect_config_error("bogus=1", "bogus");
  expect_config_error("rounds=2 rounds=3", "rounds");
  expect_config_error("rounds=two", "rounds");
  expect_config_error("rounds=0", "rounds");
  expect_config_error("mode=federated", "mode");
  expect_config_error("scheme=gradual n_clients=3", "n_clients");
  expect_config_error("scheme=explicit proportions=0.5,0.4", "proportions");
  expect_config_error("clip_bound=0", "clip_bound");
  expect_config_error("image_size=36", "gen_channels");
  EXPECT_THROW(parse_config("justtext"), ConfigError);
}

TEST(Config, TextRoundTrip) {
  const ExperimentConfig c = parse_config(
      "mode=fed noise_multiplier=0.5 clip_bound=0.25 lr_g=0.003 scheme=explicit proportions=0.7,0.3 seed=99 "
      "data_seed=5 checkpoints=final output_dir=/tmp/x latent_samples=10 threads=2");
  const ExperimentConfig d = parse_config(to_config_text(c));
  EXPECT_EQ(to_config_text(c), to_config_text(d));
  EXPECT_EQ(d.training.lr_g, 0.003);
  EXPECT_EQ(d.effective_data_seed(), 5u);
  EXPECT_EQ(d.checkpoints, CheckpointPolicy::kFinal);
}

TEST(Csv, DoubleFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 99.0, 0.0, 123456789.125}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_THROW(parse_double("1.5x"), std::exception);
  EXPECT_THROW(parse_int("7.0"), std::exception);
}

TEST(Csv, TablesRoundTrip) {
  const std::vector<MetricsRecord> m{{1, "A->B", 0.1, 20.0, 0.5}, {1, "B->A", 0.2, 14.0, 0.4}};
  std::stringstream ss;
  write_csv(ss, metrics_table(m));
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "round_or_epoch,direction,mae,psnr,ssim");
  const auto back = parse_metrics(read_csv(ss));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].direction, "B->A");
  EXPECT_EQ(back[1].psnr, 14.0);

  const std::vector<LatentPoint> pts{{4, LatentGroup::kFakeB, 0.25, -1e-3}};
  EXPECT_EQ(parse_latent(latent_table(pts))[0].group, LatentGroup::kFakeB);
  EXPECT_EQ(parse_latent(latent_table(pts))[0].y, -1e-3);

  SummaryRow row{3, {0.5, 0.75, {1, 2, 3, 4}}};
  const auto srow = parse_summary(summary_table({row}));
  EXPECT_EQ(srow[0].summary.diversity[3], 4.0);
  EXPECT_EQ(summary_table({row}).header.size(), 7u);

  const auto man = parse_manifest(manifest_table({{0, -1, false}, {1, 2, true}}));
  EXPECT_EQ(man[0].client_id, -1);
  EXPECT_TRUE(man[1].paired);
}

TEST(Prepare, SplitCoversAndCentralUsesOneClient) {
  ExperimentConfig cfg = parse_config(kTiny);
  const PreparedData fed = prepare_data(cfg);
  EXPECT_EQ(fed.test.size(), 6u);
  EXPECT_EQ(fed.train.size(), 24u);
  ASSERT_EQ(fed.clients.size(), 2u);
  EXPECT_EQ(fed.clients[0].size() + fed.clients[1].size(), 24u);
  ASSERT_EQ(fed.manifest.size(), 30u);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(fed.manifest[i].sample_id, static_cast<int>(i));
  cfg.mode = Mode::kCentral;
  cfg.training.dp.enabled = false;
  EXPECT_EQ(prepare_data(cfg).clients.size(), 1u);
}

TEST(Run, OutputsRowCountsAndDeterminism) {
  ExperimentConfig cfg = parse_config(kTiny);
  cfg.output_dir = scratch("det1");
  const auto r1 = run_experiment(cfg);
  EXPECT_EQ(r1.metrics.size(), 4u);
  EXPECT_EQ(r1.latent_points_per_eval, 24u);
  const auto metrics = parse_metrics(read_csv_file(cfg.output_dir / "metrics.csv"));
  ASSERT_EQ(metrics.size(), 4u);
  EXPECT_EQ(metrics[2].round, 2);
  EXPECT_EQ(parse_latent(read_csv_file(cfg.output_dir / "latent_round_2.csv")).size(), 24u);
  EXPECT_EQ(parse_summary(read_csv_file(cfg.output_dir / "summary.csv")).size(), 2u);
  EXPECT_EQ(parse_manifest(read_csv_file(cfg.output_dir / "manifest.csv")).size(), 30u);
  const ParamVector ckpt = load_checkpoint(cfg.output_dir / "checkpoints" / "gen_AB_round_2.bin");
  EXPECT_GT(ckpt.size(), 0u);
  EXPECT_EQ(parse_config(slurp(cfg.output_dir / "config_used.txt")).seed, 3u);

  ExperimentConfig again = cfg;
  again.output_dir = scratch("det2");
  run_experiment(again);
  EXPECT_EQ(slurp(cfg.output_dir / "metrics.csv"), slurp(again.output_dir / "metrics.csv"));
  EXPECT_EQ(slurp(cfg.output_dir / "latent_round_2.csv"), slurp(again.output_dir / "latent_round_2.csv"));

  ExperimentConfig other = cfg;
  other.seed = 4;
  other.output_dir = scratch("det3");
  run_experiment(other);
  EXPECT_NE(slurp(cfg.output_dir / "metrics.csv"), slurp(other.output_dir / "metrics.csv"));
  for (const auto& d : {cfg.output_dir, again.output_dir, other.output_dir}) fs::remove_all(d);
}

TEST(Run, CentralModesWriteOneRowPairPerEpoch) {
  for (const char* mode : {"central", "central_dp"}) {
    ExperimentConfig cfg = parse_config(std::string(kTiny) + "mode=" + mode + " checkpoints=none");
    cfg.output_dir = scratch(std::string("central_") + mode);
    const auto r = run_experiment(cfg);
    EXPECT_EQ(r.metrics.size(), 4u);
    EXPECT_FALSE(fs::exists(cfg.output_dir / "checkpoints"));
    EXPECT_TRUE(fs::exists(cfg.output_dir / "latent_round_2.csv"));
    fs::remove_all(cfg.output_dir);
  }
}

TEST(Run, DivergenceReportsRound) {
  ExperimentConfig cfg = parse_config(std::string(kTiny) + "lr_g=1e300 lr_d=1e300");
  cfg.output_dir = scratch("diverge");
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("round"), std::string::npos) << e.what();
  }
  fs::remove_all(cfg.output_dir);
}

TEST(Compare, TwoRowsPerDirectionWithBudgets) {
  ExperimentConfig cfg = parse_config(kTiny);
  cfg.output_dir = scratch("compare");
  const auto rows = compare_modes(cfg);
  ASSERT_EQ(rows.size(), 4u);
  const CsvTable t = read_csv_file(cfg.output_dir / "comparison.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"mode", "direction", "epoch_budget", "mae", "psnr", "ssim"}));
  ASSERT_EQ(t.rows.size(), 4u);
  EXPECT_EQ(t.rows[0][0], "central");
  EXPECT_EQ(t.rows[2][0], "fed_dp");
  EXPECT_EQ(t.rows[0][2], "2");
  for (const auto& r : rows) EXPECT_TRUE(std::isfinite(r.final_metrics.mae) && std::isfinite(r.final_metrics.ssim));
  fs::remove_all(cfg.output_dir);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FEDCYC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "good.conf") << kTiny << "checkpoints=none\n";
  std::ofstream(dir / "bad.conf") << "paired_ratio=1.5\n";
  std::ofstream(dir / "diverge.conf") << kTiny << "lr_g=1e300 lr_d=1e300\n";
  EXPECT_EQ(run_cli("run " + (dir / "good.conf").string() + " --out " + (dir / "out").string() + " --seed 5"), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "metrics.csv"));
  EXPECT_EQ(parse_config(slurp(dir / "out" / "config_used.txt")).seed, 5u);
  EXPECT_EQ(run_cli("run " + (dir / "bad.conf").string()), 1);
  EXPECT_EQ(run_cli("run " + (dir / "missing.conf").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("run " + (dir / "diverge.conf").string() + " --out " + (dir / "div").string()), 2);
  // Output path blocked by a regular file.
  std::ofstream(dir / "blocker") << "x";
  EXPECT_EQ(run_cli("run " + (dir / "good.conf").string() + " --out " + (dir / "blocker").string()), 2);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace fedcyc
