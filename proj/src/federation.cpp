#include "fedcyc/federation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "fedcyc/errors.hpp"
#include "fedcyc/ops.hpp"
#include "fedcyc/rng.hpp"

namespace fedcyc {

namespace {

constexpr double kWeightTolerance = 1e-9;
constexpr std::size_t kEvalBatch = 16;

Tensor to_model_range(const Tensor& unit) {
  std::vector<double> v(unit.data().begin(), unit.data().end());
  for (double& x : v) x = 2.0 * x - 1.0;
  return Tensor(unit.shape(), std::move(v));
}

void momentum_step(Discriminator& disc, std::vector<double>& velocity, double lr, double momentum) {
  const auto params = disc.parameters();
  const ParamVector grad = flatten_grads(params);
  ParamVector values = flatten_values(params);
  if (velocity.size() != values.values.size()) velocity.assign(values.values.size(), 0.0);
  for (std::size_t i = 0; i < velocity.size(); ++i) {
    velocity[i] = momentum * velocity[i] + grad.values[i];
    values.values[i] -= lr * velocity[i];
  }
  unflatten_values(params, values);
}

void dp_generator_step(Generator& gen, const TrainingConfig& cfg, SeededRng& rng) {
  const auto params = gen.parameters();
  const ParamVector updated = dp_gradient_step(flatten_values(params), flatten_grads(params), cfg.dp, cfg.lr_g, rng);
  unflatten_values(params, updated);
}

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(std::string("non-finite ") + what);
}

struct Batch {
  bool paired = false;
  std::vector<std::size_t> indices;
};

std::vector<Batch> make_batches(const ClientDataset& data, std::size_t batch_size, SeededRng& rng) {
  std::vector<Batch> batches;
  auto chunk = [&](std::size_t count, bool paired) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (std::size_t start = 0; start < count; start += batch_size) {
      const std::size_t end = std::min(count, start + batch_size);
      batches.push_back({paired, {idx.begin() + static_cast<std::ptrdiff_t>(start),
                                  idx.begin() + static_cast<std::ptrdiff_t>(end)}});
    }
  };
  chunk(data.paired.size(), true);
  chunk(data.unpaired_a.size(), false);
  rng.shuffle(batches);
  return batches;
}

}  // namespace

void TrainingConfig::validate() const {
  if (local_epochs == 0 || rounds == 0) throw std::invalid_argument("rounds and local_epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (!(lr_g >= 0.0) || !(lr_d >= 0.0)) throw std::invalid_argument("learning rates must be non-negative");
  if (!(momentum_d >= 0.0 && momentum_d < 1.0)) throw std::invalid_argument("momentum_d must lie in [0, 1)");
  dp.validate();
  loss_weights.validate();
}

ServerState make_server(const ModelConfig& config, std::uint64_t seed) {
  return {Generator(config.generator, derive_seed(seed, {tag(Stream::kGeneratorInit), 0})),
          Generator(config.generator, derive_seed(seed, {tag(Stream::kGeneratorInit), 1})), 0};
}

GanModels make_models(const ModelConfig& config, std::uint64_t seed, int client_id) {
  ServerState init = make_server(config, seed);
  const auto cid = static_cast<std::uint64_t>(client_id);
  return {std::move(init.gen_ab),
          std::move(init.gen_ba),
          Discriminator(config.discriminator, derive_seed(seed, {tag(Stream::kDiscriminatorInit), cid, 0})),
          Discriminator(config.discriminator, derive_seed(seed, {tag(Stream::kDiscriminatorInit), cid, 1})),
          {},
          {}};
}

ClientState make_client(int id, const ModelConfig& config, ClientDataset dataset, double weight,
                        std::uint64_t seed) {
  if (!(weight > 0.0 && weight <= 1.0)) throw std::invalid_argument("client weight must lie in (0, 1]");
  return {id, make_models(config, seed, id), std::move(dataset), weight};
}

void broadcast(const ServerState& server, std::vector<ClientState>& clients) {
  const ParamVector ab = flatten_params(server.gen_ab);
  const ParamVector ba = flatten_params(server.gen_ba);
  for (auto& c : clients) {
    unflatten_params(c.models.gen_ab, ab);
    unflatten_params(c.models.gen_ba, ba);
  }
}

StepLosses train_step(GanModels& m, const Tensor& a_batch, const Tensor& b_batch, bool paired,
                      const TrainingConfig& cfg, SeededRng& rng) {
  StepLosses losses;
  const Tensor fake_b = m.gen_ab.forward(a_batch);
  const Tensor fake_a = m.gen_ba.forward(b_batch);

  // Discriminators see detached fakes so no gradient reaches the generators.
  m.disc_ab.zero_grad();
  const Tensor loss_dab = adv_loss_discriminator(m.disc_ab.forward(b_batch), m.disc_ab.forward(fake_b.detach()));
  loss_dab.backward();
  m.disc_ba.zero_grad();
  const Tensor loss_dba = adv_loss_discriminator(m.disc_ba.forward(a_batch), m.disc_ba.forward(fake_a.detach()));
  loss_dba.backward();
  losses.disc_ab = loss_dab.item();
  losses.disc_ba = loss_dba.item();
  require_finite(losses.disc_ab + losses.disc_ba, "discriminator loss");
  momentum_step(m.disc_ab, m.velocity_ab, cfg.lr_d, cfg.momentum_d);
  momentum_step(m.disc_ba, m.velocity_ba, cfg.lr_d, cfg.momentum_d);

  m.gen_ab.zero_grad();
  m.gen_ba.zero_grad();
  GeneratorLossParts parts{adv_loss_generator(m.disc_ab.forward(fake_b)),
                           adv_loss_generator(m.disc_ba.forward(fake_a)),
                           cycle_loss(m.gen_ba.forward(fake_b), a_batch),
                           cycle_loss(m.gen_ab.forward(fake_a), b_batch),
                           std::nullopt,
                           std::nullopt};
  if (paired) {
    parts.paired_ab = paired_loss(fake_b, b_batch);
    parts.paired_ba = paired_loss(fake_a, a_batch);
  }
  const Tensor loss_g = compose_generator_loss(parts, cfg.loss_weights);
  losses.generator = loss_g.item();
  require_finite(losses.generator, "generator loss");
  loss_g.backward();
  dp_generator_step(m.gen_ab, cfg, rng);
  dp_generator_step(m.gen_ba, cfg, rng);
  return losses;
}

void train_epoch(GanModels& models, const ClientDataset& data, const TrainingConfig& cfg, std::uint64_t seed,
                 int stream_id, std::size_t epoch_index) {
  SeededRng rng(derive_seed(seed, {tag(Stream::kEpoch), static_cast<std::uint64_t>(stream_id), epoch_index}));
  for (const Batch& batch : make_batches(data, cfg.batch_size, rng)) {
    std::vector<Tensor> as;
    std::vector<Tensor> bs;
    for (std::size_t i : batch.indices) {
      if (batch.paired) {
        as.push_back(to_model_range(data.paired[i].modality_a));
        bs.push_back(to_model_range(data.paired[i].modality_b));
      } else {
        as.push_back(to_model_range(data.unpaired_a[i].image));
        bs.push_back(to_model_range(data.unpaired_b[i].image));
      }
    }
    try {
      train_step(models, ops::stack(as), ops::stack(bs), batch.paired, cfg, rng);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " (stream " + std::to_string(stream_id) + ", epoch " +
                           std::to_string(epoch_index + 1) + ")");
    }
  }
}

ClientUpdate local_train(ClientState& client, const TrainingConfig& cfg, std::uint64_t seed, int round) {
  if (client.dataset.size() == 0) throw std::invalid_argument("client " + std::to_string(client.id) + " has no data");
  const std::size_t first = static_cast<std::size_t>(round) * cfg.local_epochs;
  for (std::size_t e = 0; e < cfg.local_epochs; ++e) {
    train_epoch(client.models, client.dataset, cfg, seed, client.id, first + e);
  }
  return {client.id, flatten_params(client.models.gen_ab), flatten_params(client.models.gen_ba)};
}

ParamVector fedavg_aggregate(const std::vector<ParamVector>& updates, const std::vector<double>& weights) {
  if (updates.empty()) throw std::invalid_argument("fedavg_aggregate: no updates");
  if (updates.size() != weights.size()) throw std::invalid_argument("fedavg_aggregate: one weight per update");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw std::invalid_argument("fedavg_aggregate: weights sum to " + std::to_string(total) + ", expected 1");
  }
  for (std::size_t k = 1; k < updates.size(); ++k) {
    require_same_layout(updates[0].layout, updates[k].layout, "fedavg_aggregate");
  }
  ParamVector out = updates[0];
  for (double& v : out.values) v *= weights[0];
  for (std::size_t k = 1; k < updates.size(); ++k) {
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += weights[k] * updates[k].values[i];
  }
  return out;
}

std::vector<MetricsRecord> evaluate(const Generator& gen_ab, const Generator& gen_ba,
                                    const std::vector<Sample>& test_set, int index) {
  if (test_set.empty()) throw std::invalid_argument("evaluate: empty test set");
  NoGradGuard no_grad;
  MetricsRecord ab{index, "A->B"};
  MetricsRecord ba{index, "B->A"};
  for (std::size_t start = 0; start < test_set.size(); start += kEvalBatch) {
    const std::size_t end = std::min(test_set.size(), start + kEvalBatch);
    std::vector<Tensor> as, bs;
    for (std::size_t i = start; i < end; ++i) {
      as.push_back(to_model_range(test_set[i].modality_a));
      bs.push_back(to_model_range(test_set[i].modality_b));
    }
    const Tensor fake_b = gen_ab.forward(ops::stack(as));
    const Tensor fake_a = gen_ba.forward(ops::stack(bs));
    const Shape image_shape = test_set[start].modality_a.shape();
    const std::size_t pixels = test_set[start].modality_a.numel();
    for (std::size_t i = start; i < end; ++i) {
      const std::size_t off = (i - start) * pixels;
      auto slice = [&](const Tensor& batch) {
        std::vector<double> v(batch.data().begin() + static_cast<std::ptrdiff_t>(off),
                              batch.data().begin() + static_cast<std::ptrdiff_t>(off + pixels));
        return to_unit_range(Tensor(image_shape, std::move(v)));
      };
      const Tensor pb = slice(fake_b);
      const Tensor pa = slice(fake_a);
      ab.mae += mae(pb, test_set[i].modality_b);
      ab.psnr += psnr(pb, test_set[i].modality_b);
      ab.ssim += ssim(pb, test_set[i].modality_b);
      ba.mae += mae(pa, test_set[i].modality_a);
      ba.psnr += psnr(pa, test_set[i].modality_a);
      ba.ssim += ssim(pa, test_set[i].modality_a);
    }
  }
  const double n = static_cast<double>(test_set.size());
  for (auto* r : {&ab, &ba}) {
    r->mae /= n;
    r->psnr /= n;
    r->ssim /= n;
  }
  return {ab, ba};
}

RoundResult run_round(ServerState& server, std::vector<ClientState>& clients, const TrainingConfig& cfg,
                      const std::vector<Sample>& test_set, std::uint64_t seed, std::span<const std::size_t> order) {
  if (clients.empty()) throw std::invalid_argument("run_round: no clients");
  std::vector<std::size_t> schedule(order.begin(), order.end());
  if (schedule.empty()) {
    schedule.resize(clients.size());
    std::iota(schedule.begin(), schedule.end(), 0);
  }
  {
    std::vector<std::size_t> check = schedule;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i) {
      if (check.size() != clients.size() || check[i] != i) {
        throw std::invalid_argument("run_round: order must be a permutation of the client indices");
      }
    }
  }

  broadcast(server, clients);
  std::vector<std::optional<ClientUpdate>> updates(clients.size());
  std::vector<std::exception_ptr> errors(clients.size());
  auto work = [&](std::size_t k) {
    try {
      updates[k] = local_train(clients[k], cfg, seed, server.round);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(cfg.threads, 1, clients.size());
  if (n_threads == 1) {
    for (std::size_t k : schedule) work(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < schedule.size(); i += n_threads) work(schedule[i]);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ParamVector> ab, ba;
  std::vector<double> weights;
  for (std::size_t k = 0; k < clients.size(); ++k) {
    ab.push_back(updates[k]->gen_ab);
    ba.push_back(updates[k]->gen_ba);
    weights.push_back(clients[k].weight);
  }
  const ParamVector new_ab = fedavg_aggregate(ab, weights);
  const ParamVector new_ba = fedavg_aggregate(ba, weights);
  unflatten_params(server.gen_ab, new_ab);
  unflatten_params(server.gen_ba, new_ba);
  ++server.round;
  return {evaluate(server.gen_ab, server.gen_ba, test_set, server.round)};
}

CentralResult train_centralized(const ClientDataset& dataset, const std::vector<Sample>& test_set,
                                const ModelConfig& model_config, const TrainingConfig& cfg, std::size_t epochs,
                                std::uint64_t seed, const EpochObserver& observer) {
  if (dataset.size() == 0) throw std::invalid_argument("train_centralized: empty dataset");
  CentralResult result{make_models(model_config, seed, 0), {}};
  for (std::size_t e = 0; e < epochs; ++e) {
    train_epoch(result.models, dataset, cfg, seed, 0, e);
    const auto records = evaluate(result.models.gen_ab, result.models.gen_ba, test_set, static_cast<int>(e + 1));
    result.metrics.insert(result.metrics.end(), records.begin(), records.end());
    if (observer) observer(static_cast<int>(e + 1), result.models);
  }
  return result;
}

}  // namespace fedcyc
