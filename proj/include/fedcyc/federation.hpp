#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fedcyc/data.hpp"
#include "fedcyc/dp.hpp"
#include "fedcyc/losses.hpp"
#include "fedcyc/metrics.hpp"
#include "fedcyc/models.hpp"
#include "fedcyc/params.hpp"

namespace fedcyc {

struct ModelConfig {
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
};

struct TrainingConfig {
  std::size_t rounds = 10;
  std::size_t local_epochs = 3;
  std::size_t central_epochs = 30;
  std::size_t batch_size = 1;
  double lr_g = 0.0018;
  double lr_d = 0.01;
  double momentum_d = 0.5;
  DpConfig dp;
  LossWeights loss_weights;
  // Worker threads for client training within a round.
  std::size_t threads = 1;

  void validate() const;
};

// Generator pair plus the discriminators and their momentum buffers.
struct GanModels {
  Generator gen_ab;
  Generator gen_ba;
  Discriminator disc_ab;  // judges B-domain images
  Discriminator disc_ba;  // judges A-domain images
  std::vector<double> velocity_ab;
  std::vector<double> velocity_ba;
};

struct ClientState {
  int id = 0;
  GanModels models;
  ClientDataset dataset;
  double weight = 0.0;
};

struct ServerState {
  Generator gen_ab;
  Generator gen_ba;
  int round = 0;
};

// What leaves a client after local training: generator parameters only.
struct ClientUpdate {
  int client_id = 0;
  ParamVector gen_ab;
  ParamVector gen_ba;
};

struct StepLosses {
  double disc_ab = 0.0;
  double disc_ba = 0.0;
  double generator = 0.0;
};

ServerState make_server(const ModelConfig& config, std::uint64_t seed);
GanModels make_models(const ModelConfig& config, std::uint64_t seed, int client_id);
ClientState make_client(int id, const ModelConfig& config, ClientDataset dataset, double weight,
                        std::uint64_t seed);

// Copies the server generators into every client; discriminators untouched.
void broadcast(const ServerState& server, std::vector<ClientState>& clients);

// One minibatch: both discriminators by plain momentum SGD on the LSGAN
// loss, then both generators by the composed loss through dp_gradient_step.
// a_batch / b_batch are [N,1,H,W] in model range [-1,1].
StepLosses train_step(GanModels& models, const Tensor& a_batch, const Tensor& b_batch, bool paired,
                      const TrainingConfig& cfg, SeededRng& rng);

// One pass over `data`. `epoch_index` selects the random stream; the caller
// guarantees a distinct index per (stream_id, epoch).
void train_epoch(GanModels& models, const ClientDataset& data, const TrainingConfig& cfg, std::uint64_t seed,
                 int stream_id, std::size_t epoch_index);

// Runs cfg.local_epochs epochs starting at global epoch round * local_epochs.
ClientUpdate local_train(ClientState& client, const TrainingConfig& cfg, std::uint64_t seed, int round);

// Element-wise sum_k w_k * theta_k; weights must sum to 1 within 1e-9.
ParamVector fedavg_aggregate(const std::vector<ParamVector>& updates, const std::vector<double>& weights);

// Mean per-image MAE/PSNR/SSIM of both directions on [0,1]-rescaled outputs.
std::vector<MetricsRecord> evaluate(const Generator& gen_ab, const Generator& gen_ba,
                                    const std::vector<Sample>& test_set, int index);

struct RoundResult {
  std::vector<MetricsRecord> metrics;
};

// broadcast -> local_train on every client -> fedavg into the server. The
// optional `order` permutes client execution order (results do not depend
// on it). On any client failure the server is left untouched.
RoundResult run_round(ServerState& server, std::vector<ClientState>& clients, const TrainingConfig& cfg,
                      const std::vector<Sample>& test_set, std::uint64_t seed,
                      std::span<const std::size_t> order = {});

using EpochObserver = std::function<void(int epoch, const GanModels& models)>;

struct CentralResult {
  GanModels models;
  std::vector<MetricsRecord> metrics;
};

// Same loop as local_train over the pooled dataset, one evaluation per epoch.
// Uses the initial models of client 0 and stream id 0, so it matches a
// single-client federation with the same schedule.
CentralResult train_centralized(const ClientDataset& dataset, const std::vector<Sample>& test_set,
                                const ModelConfig& model_config, const TrainingConfig& cfg, std::size_t epochs,
                                std::uint64_t seed, const EpochObserver& observer = {});

}  // namespace fedcyc
