// SPDX-License-Identifier: Apache-2.0

#include "feddp/federation.hpp"

#include <algorithm>
#include <cmath>

#include "feddp/error.hpp"

namespace feddp {

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Centralized: return "Centralized";
    case Mode::FLR: return "FLR";
    case Mode::OpenFLR: return "OpenFLR";
    case Mode::FedDP: return "FedDP";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  for (Mode m : {Mode::Centralized, Mode::FLR, Mode::OpenFLR, Mode::FedDP}) {
    std::string_view name = to_string(m);
    if (name.size() == text.size() &&
        std::equal(name.begin(), name.end(), text.begin(),
                   [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return m;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown mode '" + std::string(text) + "'");
}

void RoundConfig::validate() const {
  if (mode == Mode::Centralized) {
    throw Error(ErrorKind::InvalidArgument, "Centralized mode has no federated rounds");
  }
  if (!(participation > 0.0 && participation <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "participation ratio must lie in (0, 1]");
  }
  if (batch_size == 0) {
    throw Error(ErrorKind::InvalidArgument, "batch size must be positive");
  }
  if (!(learning_rate >= 0.0) || !(server_learning_rate >= 0.0) || !(prox_mu >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "learning rates and prox_mu must be non-negative");
  }
  if (mode == Mode::FedDP && distill_steps > 0 && sample_size == 0) {
    throw Error(ErrorKind::InvalidArgument, "FedDP distillation needs a positive sample size");
  }
}

std::vector<ClientId> select_clients(std::size_t client_count, double ratio, Rng& rng) {
  if (client_count == 0) {
    throw Error(ErrorKind::EmptyInput, "select_clients: no clients");
  }
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "select_clients: ratio must lie in (0, 1]");
  }
  const auto rounded = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(client_count) + 0.5));
  const std::size_t m = std::clamp<std::size_t>(rounded, 1, client_count);
  std::vector<ClientId> ids;
  for (std::size_t idx : rng.sample_without_replacement(client_count, m)) {
    ids.push_back(static_cast<ClientId>(idx));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

ModelParams aggregate(std::span<const ModelParams> models, std::span<const std::size_t> sizes) {
  if (models.empty()) {
    throw Error(ErrorKind::EmptyInput, "aggregate: no models");
  }
  if (models.size() != sizes.size()) {
    throw Error(ErrorKind::LengthMismatch, "aggregate: models and sizes differ in length");
  }
  double total = 0.0;
  for (std::size_t s : sizes) {
    if (s == 0) {
      throw Error(ErrorKind::InvalidArgument, "aggregate: dataset sizes must be positive");
    }
    total += static_cast<double>(s);
  }
  const ModelParams& base = models.front();
  ModelParams out = base;
  for (std::size_t k = 1; k < models.size(); ++k) {
    if (models[k].dimensionality() != base.dimensionality()) {
      throw Error(ErrorKind::DimensionMismatch, "aggregate: model dimensionalities differ");
    }
    const double w = static_cast<double>(sizes[k]) / total;
    for (std::size_t j = 0; j < out.weights.size(); ++j) {
      out.weights[j] += w * (models[k].weights[j] - base.weights[j]);
    }
    out.bias += w * (models[k].bias - base.bias);
  }
  return out;
}

Client::Client(ClientId id, ProjectDataset data)
    : id_(id), data_(std::move(data)), params_(ModelParams::zeros(data_.dimensionality())) {}

ClientUpload Client::update(const ModelParams& global, const RoundConfig& cfg, const ProjectDataset& distill,
                            std::uint64_t seed) {
  TrainSpec spec;
  spec.learning_rate = cfg.learning_rate;
  spec.epochs = cfg.local_epochs;
  spec.batch_size = cfg.batch_size;
  spec.prox_mu = cfg.prox_mu;
  if (cfg.prox_mu > 0.0) {
    spec.anchor = global;
  }
  Rng rng(seed);
  params_ = local_train(global, data_, spec, rng);

  ClientUpload upload{params_, {}};
  if (cfg.mode == Mode::FedDP) {
    if (!correlation_) {
      correlation_ = compute_correlation_factors(data_, distill);
    }
    upload.correlation = *correlation_;
  }
  return upload;
}

Server::Server(ModelParams initial, std::vector<Client> clients, ProjectDataset distillation, std::uint64_t seed)
    : global_(std::move(initial)), clients_(std::move(clients)), distillation_(std::move(distillation)), seed_(seed) {
  if (clients_.empty()) {
    throw Error(ErrorKind::EmptyInput, "server needs at least one client");
  }
  std::sort(clients_.begin(), clients_.end(), [](const Client& a, const Client& b) { return a.id() < b.id(); });
  for (std::size_t k = 0; k < clients_.size(); ++k) {
    if (k > 0 && clients_[k].id() == clients_[k - 1].id()) {
      throw Error(ErrorKind::InvalidArgument, "duplicate client id " + std::to_string(clients_[k].id()));
    }
    if (clients_[k].dimensionality() != global_.dimensionality()) {
      throw Error(ErrorKind::DimensionMismatch, "client dimensionality differs from the global model");
    }
  }
  if (distillation_.dimensionality() != global_.dimensionality()) {
    throw Error(ErrorKind::DimensionMismatch, "distillation dimensionality differs from the global model");
  }
}

RoundRecord Server::run_round(const RoundConfig& cfg) {
  cfg.validate();
  const std::size_t t = round_ + 1;

  Rng select_rng(derive_seed(seed_, {stream::kSelect, t}));
  const auto positions = select_clients(clients_.size(), cfg.participation, select_rng);

  // Positions ascend and clients_ is sorted by id, so participants ascend by
  // id; every floating-point reduction below runs in that order.
  std::vector<ClientId> participants;
  std::vector<ModelParams> locals;
  std::vector<std::size_t> sizes;
  CorrelationMatrix factors(distillation_.size());
  for (ClientId pos : positions) {
    Client& client = clients_[static_cast<std::size_t>(pos)];
    const auto client_seed = derive_seed(seed_, {stream::kClientTrain, t, static_cast<std::uint64_t>(client.id())});
    ClientUpload upload = client.update(global_, cfg, distillation_, client_seed);
    participants.push_back(client.id());
    sizes.push_back(client.sample_count());
    if (!upload.correlation.empty()) {
      factors.set_row(client.id(), std::move(upload.correlation));
    }
    locals.push_back(std::move(upload.params));
  }

  ModelParams next = aggregate(locals, sizes);
  RoundRecord record;
  record.round = t;
  record.mode = cfg.mode;

  switch (cfg.mode) {
    case Mode::FLR:
    case Mode::Centralized:
      break;
    case Mode::OpenFLR: {
      TrainSpec spec;
      spec.learning_rate = cfg.server_learning_rate;
      spec.epochs = cfg.local_epochs;
      spec.batch_size = cfg.batch_size;
      Rng rng(derive_seed(seed_, {stream::kServerTrain, t}));
      next = local_train(next, distillation_, spec, rng);
      break;
    }
    case Mode::FedDP: {
      if (cfg.distill_steps == 0) {
        break;
      }
      Rng rng(derive_seed(seed_, {stream::kDistillSubset, t}));
      const std::size_t p = std::min(cfg.sample_size, distillation_.size());
      const auto subset = rng.sample_without_replacement(distillation_.size(), p);
      const DistillSpec spec{cfg.distill_steps, cfg.server_learning_rate, cfg.weighting};
      auto outcome = distill(next, locals, participants, factors, distillation_, subset, spec);
      next = std::move(outcome.params);
      record.kl_before = outcome.kl_before;
      record.kl_after = outcome.kl_after;
      break;
    }
  }

  global_ = std::move(next);
  round_ = t;
  record.participants = std::move(participants);
  record.checksum = global_.checksum();
  return record;
}

}  // namespace feddp
