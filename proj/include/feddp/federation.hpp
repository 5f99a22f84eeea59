// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_FEDERATION_HPP
#define FEDDP_FEDERATION_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "feddp/dataset.hpp"
#include "feddp/distillation.hpp"
#include "feddp/evaluation.hpp"
#include "feddp/model.hpp"
#include "feddp/rng.hpp"

namespace feddp {

enum class Mode {
  /// Pooled training without federation (experiment-level baseline).
  Centralized,
  /// Plain parameter averaging.
  FLR,
  /// Averaging followed by cross-entropy training on the open-source data.
  OpenFLR,
  /// Averaging followed by correlation-weighted ensemble distillation.
  FedDP,
};

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view text);

struct RoundConfig {
  Mode mode = Mode::FLR;
  /// Fraction of clients selected each round, in (0, 1].
  double participation = 1.0;
  std::size_t local_epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.001;
  /// Learning rate for server-side training (OpenFLR) and distillation.
  double server_learning_rate = 0.001;
  /// FedProx coefficient; 0 is plain FedAvg.
  double prox_mu = 0.0;
  /// Distillation epochs per round; 0 disables distillation.
  std::size_t distill_steps = 10;
  /// Distillation samples drawn per round (clamped to the dataset size).
  std::size_t sample_size = 700;
  TeacherWeighting weighting = TeacherWeighting::Correlation;

  void validate() const;
};

/// m = max(round(R * K), 1) distinct ids from [0, K), ascending.
std::vector<ClientId> select_clients(std::size_t client_count, double ratio, Rng& rng);

/// Weighted average with weights sizes[k] / sum(sizes), accumulated in the
/// given order as models[0] + sum_k w_k (models[k] - models[0]). Copies of
/// one model therefore aggregate to exactly that model.
ModelParams aggregate(std::span<const ModelParams> models, std::span<const std::size_t> sizes);

/// Everything a client sends back to the server in one round.
struct ClientUpload {
  ModelParams params;
  /// Correlation factors over the full distillation dataset; empty unless
  /// the round runs in FedDP mode.
  std::vector<double> correlation;
};

/// A participant holding private training data. The data has no accessor:
/// the only way information leaves a client is the ClientUpload returned by
/// update(), plus the instance count used as the aggregation weight.
class Client {
 public:
  Client(ClientId id, ProjectDataset data);

  [[nodiscard]] ClientId id() const noexcept { return id_; }
  [[nodiscard]] std::size_t sample_count() const noexcept { return data_.size(); }
  [[nodiscard]] std::size_t dimensionality() const noexcept { return data_.dimensionality(); }
  [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
  [[nodiscard]] bool has_cached_correlation() const noexcept { return correlation_.has_value(); }

  /// Local training from the received global model for cfg.local_epochs
  /// epochs (FedProx anchor = the received model when prox_mu > 0). The
  /// correlation factors depend only on data, so they are computed on the
  /// first FedDP round and reused afterwards.
  ClientUpload update(const ModelParams& global, const RoundConfig& cfg, const ProjectDataset& distill,
                      std::uint64_t seed);

 private:
  ClientId id_;
  ProjectDataset data_;
  ModelParams params_;
  std::optional<std::vector<double>> correlation_;
};

struct RoundRecord {
  std::size_t round = 0;
  Mode mode = Mode::FLR;
  std::vector<ClientId> participants;
  std::uint64_t checksum = 0;
  /// Mean distillation loss over the round's subset (FedDP rounds only).
  std::optional<double> kl_before;
  std::optional<double> kl_after;
  /// Test metrics of the new global model, filled in by the experiment loop.
  std::optional<MetricsReport> metrics;

  friend bool operator==(const RoundRecord&, const RoundRecord&) = default;
};

class Server {
 public:
  /// Clients are ordered by id; per-(round, client) randomness is derived
  /// from `seed`, so the initial order of `clients` does not matter.
  Server(ModelParams initial, std::vector<Client> clients, ProjectDataset distillation, std::uint64_t seed);

  /// One communication round: select, local updates, aggregate, then the
  /// mode-specific server step. Increments round() by one.
  RoundRecord run_round(const RoundConfig& cfg);

  [[nodiscard]] const ModelParams& global() const noexcept { return global_; }
  [[nodiscard]] std::size_t round() const noexcept { return round_; }
  [[nodiscard]] const std::vector<Client>& clients() const noexcept { return clients_; }
  [[nodiscard]] const ProjectDataset& distillation() const noexcept { return distillation_; }

 private:
  ModelParams global_;
  std::vector<Client> clients_;
  ProjectDataset distillation_;
  std::uint64_t seed_;
  std::size_t round_ = 0;
};

}  // namespace feddp

#endif  // FEDDP_FEDERATION_HPP
