// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_DISTILLATION_HPP
#define FEDDP_DISTILLATION_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "feddp/dataset.hpp"
#include "feddp/model.hpp"

namespace feddp {

using ClientId = int;

/// Mean cosine similarity between each distillation sample and the local
/// instances: entry i = (1/|local|) * sum_j cos(distill_i, local_j). Pairs
/// involving an all-zero vector contribute 0.
std::vector<double> compute_correlation_factors(const ProjectDataset& local, const ProjectDataset& distill);

/// Correlation factors C[k][i] keyed by client id. Rows are kept sorted by
/// id; every row has the same length and entries in [-1, 1].
class CorrelationMatrix {
 public:
  CorrelationMatrix() = default;
  explicit CorrelationMatrix(std::size_t sample_count) : sample_count_(sample_count) {}

  /// Adds or replaces the row for `client`.
  void set_row(ClientId client, std::vector<double> factors);

  [[nodiscard]] bool contains(ClientId client) const noexcept;
  [[nodiscard]] const std::vector<double>& row(ClientId client) const;
  [[nodiscard]] double at(ClientId client, std::size_t sample) const { return row(client).at(sample); }
  [[nodiscard]] std::vector<ClientId> clients() const;
  [[nodiscard]] std::size_t sample_count() const noexcept { return sample_count_; }

 private:
  std::size_t sample_count_ = 0;
  std::vector<std::pair<ClientId, std::vector<double>>> rows_;
};

/// Per-sample personalized weights over `participants`, aligned with that
/// order. Negative factors are floored at 0 before normalizing; if every
/// floored factor is 0 the weights fall back to uniform.
std::vector<double> normalize_weights(const CorrelationMatrix& factors, std::size_t sample,
                                      std::span<const ClientId> participants);

/// Convex combination of the local models' soft predictions.
SoftPrediction ensemble_teacher(std::span<const ModelParams> locals, std::span<const double> weights,
                                std::span<const double> x);

enum class TeacherWeighting {
  /// Weights from the correlation factors (the full method).
  Correlation,
  /// Equal weight for every participant (ablation without factors).
  Uniform,
};

struct DistillSpec {
  std::size_t steps = 10;
  double learning_rate = 0.001;
  TeacherWeighting weighting = TeacherWeighting::Correlation;
};

struct DistillOutcome {
  ModelParams params;
  /// Mean KL(teacher || student) over the subset before the first and after
  /// the last step.
  double kl_before = 0.0;
  double kl_after = 0.0;
};

/// Server-side ensemble distillation. Teachers are computed once from the
/// frozen local models (locals[k] belongs to participants[k]); each of the
/// `steps` epochs then applies one full-subset gradient step on the mean
/// KL(teacher || student). Local models are never modified.
DistillOutcome distill(const ModelParams& global, std::span<const ModelParams> locals,
                       std::span<const ClientId> participants, const CorrelationMatrix& factors,
                       const ProjectDataset& distill_data, std::span<const std::size_t> subset,
                       const DistillSpec& spec);

}  // namespace feddp

#endif  // FEDDP_DISTILLATION_HPP
