// SPDX-License-Identifier: Apache-2.0

#include "feddp/distillation.hpp"

#include <algorithm>
#include <cmath>

#include "feddp/error.hpp"

namespace feddp {

namespace {

// Unit-length copy of x; empty for the zero vector.
std::vector<double> unit(std::span<const double> x) {
  double sq = 0.0;
  for (double v : x) {
    sq += v * v;
  }
  if (sq == 0.0) {
    return {};
  }
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) {
    v *= inv;
  }
  return out;
}

}  // namespace

std::vector<double> compute_correlation_factors(const ProjectDataset& local, const ProjectDataset& distill) {
  if (local.dimensionality() != distill.dimensionality()) {
    throw Error(ErrorKind::DimensionMismatch, "correlation factors: local and distillation dimensionality differ");
  }
  // mean_j cos(a, b_j) = a_hat . (sum_j b_hat_j) / n, so one pass over the
  // local data replaces the |local| x |distill| double loop.
  const std::size_t d = local.dimensionality();
  std::vector<double> direction_sum(d, 0.0);
  for (const auto& inst : local.instances()) {
    const auto u = unit(inst.features);
    for (std::size_t j = 0; j < u.size(); ++j) {
      direction_sum[j] += u[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(local.size());
  std::vector<double> factors;
  factors.reserve(distill.size());
  for (const auto& inst : distill.instances()) {
    const auto u = unit(inst.features);
    double dot = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      dot += u[j] * direction_sum[j];
    }
    factors.push_back(std::clamp(dot * inv_n, -1.0, 1.0));
  }
  return factors;
}

void CorrelationMatrix::set_row(ClientId client, std::vector<double> factors) {
  if (factors.size() != sample_count_) {
    throw Error(ErrorKind::DimensionMismatch, "correlation row length " + std::to_string(factors.size()) +
                                                  " does not match sample count " +
                                                  std::to_string(sample_count_));
  }
  for (double c : factors) {
    if (!(c >= -1.0 && c <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "correlation factor outside [-1, 1]");
    }
  }
  auto it = std::lower_bound(rows_.begin(), rows_.end(), client,
                             [](const auto& row, ClientId id) { return row.first < id; });
  if (it != rows_.end() && it->first == client) {
    it->second = std::move(factors);
  } else {
    rows_.emplace(it, client, std::move(factors));
  }
}

bool CorrelationMatrix::contains(ClientId client) const noexcept {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), client,
                             [](const auto& row, ClientId id) { return row.first < id; });
  return it != rows_.end() && it->first == client;
}

const std::vector<double>& CorrelationMatrix::row(ClientId client) const {
  auto it = std::lower_bound(rows_.begin(), rows_.end(), client,
                             [](const auto& row, ClientId id) { return row.first < id; });
  if (it == rows_.end() || it->first != client) {
    throw Error(ErrorKind::InvalidArgument, "no correlation factors for client " + std::to_string(client));
  }
  return it->second;
}

std::vector<ClientId> CorrelationMatrix::clients() const {
  std::vector<ClientId> ids;
  ids.reserve(rows_.size());
  for (const auto& [id, _] : rows_) {
    ids.push_back(id);
  }
  return ids;
}

std::vector<double> normalize_weights(const CorrelationMatrix& factors, std::size_t sample,
                                      std::span<const ClientId> participants) {
  if (participants.empty()) {
    throw Error(ErrorKind::EmptyInput, "normalize_weights: no participants");
  }
  if (sample >= factors.sample_count()) {
    throw Error(ErrorKind::InvalidArgument, "normalize_weights: sample index out of range");
  }
  std::vector<double> weights;
  weights.reserve(participants.size());
  double total = 0.0;
  for (ClientId k : participants) {
    const double c = std::max(factors.at(k, sample), 0.0);
    weights.push_back(c);
    total += c;
  }
  if (total > 0.0) {
    for (double& w : weights) {
      w /= total;
    }
  } else {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(participants.size()));
  }
  return weights;
}

SoftPrediction ensemble_teacher(std::span<const ModelParams> locals, std::span<const double> weights,
                                std::span<const double> x) {
  if (locals.empty()) {
    throw Error(ErrorKind::EmptyInput, "ensemble_teacher: no local models");
  }
  if (locals.size() != weights.size()) {
    throw Error(ErrorKind::LengthMismatch, "ensemble_teacher: weights do not align with local models");
  }
  double p1 = 0.0;
  double lo = 1.0;
  double hi = 0.0;
  for (std::size_t k = 0; k < locals.size(); ++k) {
    const double s = predict_proba(locals[k], x).defective();
    p1 += weights[k] * s;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  // Keep rounding from stepping outside the convex hull.
  return SoftPrediction::from_defective(std::clamp(p1, lo, hi));
}

DistillOutcome distill(const ModelParams& global, std::span<const ModelParams> locals,
                       std::span<const ClientId> participants, const CorrelationMatrix& factors,
                       const ProjectDataset& distill_data, std::span<const std::size_t> subset,
                       const DistillSpec& spec) {
  if (subset.empty()) {
    throw Error(ErrorKind::EmptyInput, "distill: empty distillation subset");
  }
  if (locals.size() != participants.size()) {
    throw Error(ErrorKind::LengthMismatch, "distill: local models do not align with participants");
  }
  if (global.dimensionality() != distill_data.dimensionality()) {
    throw Error(ErrorKind::DimensionMismatch, "distill: model and distillation data dimensionality differ");
  }

  std::vector<SoftPrediction> teachers;
  teachers.reserve(subset.size());
  const std::vector<double> uniform(participants.size(), 1.0 / static_cast<double>(participants.size()));
  for (std::size_t i : subset) {
    const auto& x = distill_data.instances().at(i).features;
    if (spec.weighting == TeacherWeighting::Correlation) {
      teachers.push_back(ensemble_teacher(locals, normalize_weights(factors, i, participants), x));
    } else {
      teachers.push_back(ensemble_teacher(locals, uniform, x));
    }
  }

  auto mean_kl = [&](const ModelParams& student) {
    double total = 0.0;
    for (std::size_t s = 0; s < subset.size(); ++s) {
      total += kl_div(teachers[s], predict_proba(student, distill_data[subset[s]].features));
    }
    return total / static_cast<double>(subset.size());
  };

  DistillOutcome out{global, mean_kl(global), 0.0};
  const double inv_n = 1.0 / static_cast<double>(subset.size());
  for (std::size_t step = 0; step < spec.steps; ++step) {
    ModelParams grad = ModelParams::zeros(global.dimensionality());
    for (std::size_t s = 0; s < subset.size(); ++s) {
      grad += kd_grad(out.params, distill_data[subset[s]].features, teachers[s]);
    }
    grad *= inv_n;
    for (std::size_t j = 0; j < grad.weights.size(); ++j) {
      out.params.weights[j] -= spec.learning_rate * grad.weights[j];
    }
    out.params.bias -= spec.learning_rate * grad.bias;
  }
  out.kl_after = spec.steps == 0 ? out.kl_before : mean_kl(out.params);
  return out;
}

}  // namespace feddp
