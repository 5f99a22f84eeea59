// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_MODEL_HPP
#define FEDDP_MODEL_HPP

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "feddp/dataset.hpp"
#include "feddp/rng.hpp"

namespace feddp {

/// Logistic-regression parameters; also the unit exchanged between clients
/// and the server.
struct ModelParams {
  std::vector<double> weights;
  double bias = 0.0;

  static ModelParams zeros(std::size_t d) { return {std::vector<double>(d, 0.0), 0.0}; }

  [[nodiscard]] std::size_t dimensionality() const noexcept { return weights.size(); }

  /// Flat record: d weights followed by the bias.
  [[nodiscard]] std::vector<double> flatten() const;
  static ModelParams unflatten(std::span<const double> flat);

  /// FNV-1a over the IEEE-754 bytes of flatten(); used in round logs.
  [[nodiscard]] std::uint64_t checksum() const noexcept;

  ModelParams& operator+=(const ModelParams& other);
  ModelParams& operator*=(double s);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

ModelParams operator+(ModelParams a, const ModelParams& b);
ModelParams operator-(ModelParams a, const ModelParams& b);
ModelParams operator*(double s, ModelParams a);

/// [p(clean), p(defective)].
struct SoftPrediction {
  std::array<double, 2> p{0.5, 0.5};

  [[nodiscard]] double clean() const noexcept { return p[0]; }
  [[nodiscard]] double defective() const noexcept { return p[1]; }

  static SoftPrediction from_defective(double p1) noexcept { return {{1.0 - p1, p1}}; }
};

inline constexpr double kProbEpsilon = 1e-12;

double sigmoid(double z) noexcept;
double logit(const ModelParams& params, std::span<const double> x);

SoftPrediction predict_proba(const ModelParams& params, std::span<const double> x);

/// p(defective) for every instance, in order.
std::vector<double> predict_scores(const ModelParams& params, const ProjectDataset& data);

/// Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps].
double ce_loss(const ModelParams& params, const ProjectDataset& data);

/// KL(p || q) with q clamped to [eps, 1 - eps]; p_c = 0 terms contribute 0.
double kl_div(const SoftPrediction& p, const SoftPrediction& q);

/// Gradient of KL(teacher || student(x)) w.r.t. the student parameters,
/// i.e. (sigmoid(z) - teacher.p1) * (x, 1).
ModelParams kd_grad(const ModelParams& student, std::span<const double> x, const SoftPrediction& teacher);

struct TrainSpec {
  double learning_rate = 0.001;
  std::size_t epochs = 1;
  std::size_t batch_size = 32;
  /// FedProx proximal coefficient; 0 disables the term.
  double prox_mu = 0.0;
  /// Proximal anchor, required when prox_mu > 0.
  std::optional<ModelParams> anchor;

  void validate() const;
};

/// Objective value on a set of instances: mean cross-entropy plus
/// (prox_mu / 2) * |params - anchor|^2 when the proximal term is active.
double objective(const ModelParams& params, std::span<const Instance> batch, const TrainSpec& spec);

/// Analytic gradient of objective() on the same instances.
ModelParams objective_grad(const ModelParams& params, std::span<const Instance> batch, const TrainSpec& spec);

/// Mini-batch gradient descent for spec.epochs epochs. Each epoch visits a
/// fresh seeded permutation in batches of spec.batch_size (the final partial
/// batch is kept). Returns new parameters; the inputs are not modified.
ModelParams local_train(const ModelParams& params, const ProjectDataset& data, const TrainSpec& spec, Rng& rng);

}  // namespace feddp

#endif  // FEDDP_MODEL_HPP
