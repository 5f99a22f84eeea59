// SPDX-License-Identifier: Apache-2.0

#include "feddp/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "feddp/error.hpp"

namespace feddp {

namespace {

void check_dims(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": model has dimensionality " +
                                                  std::to_string(expected) + ", input has " +
                                                  std::to_string(actual));
  }
}

double clamp_prob(double p) noexcept { return std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon); }

}  // namespace

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat = weights;
  flat.push_back(bias);
  return flat;
}

ModelParams ModelParams::unflatten(std::span<const double> flat) {
  if (flat.empty()) {
    throw Error(ErrorKind::EmptyInput, "unflatten: empty record");
  }
  return {std::vector<double>(flat.begin(), flat.end() - 1), flat.back()};
}

std::uint64_t ModelParams::checksum() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (double w : weights) {
    mix(w);
  }
  mix(bias);
  return h;
}

ModelParams& ModelParams::operator+=(const ModelParams& other) {
  check_dims(weights.size(), other.weights.size(), "ModelParams +=");
  for (std::size_t j = 0; j < weights.size(); ++j) {
    weights[j] += other.weights[j];
  }
  bias += other.bias;
  return *this;
}

ModelParams& ModelParams::operator*=(double s) {
  for (double& w : weights) {
    w *= s;
  }
  bias *= s;
  return *this;
}

ModelParams operator+(ModelParams a, const ModelParams& b) { return a += b; }

ModelParams operator-(ModelParams a, const ModelParams& b) {
  check_dims(a.weights.size(), b.weights.size(), "ModelParams -");
  for (std::size_t j = 0; j < a.weights.size(); ++j) {
    a.weights[j] -= b.weights[j];
  }
  a.bias -= b.bias;
  return a;
}

ModelParams operator*(double s, ModelParams a) { return a *= s; }

double sigmoid(double z) noexcept {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(const ModelParams& params, std::span<const double> x) {
  check_dims(params.weights.size(), x.size(), "logit");
  return std::inner_product(x.begin(), x.end(), params.weights.begin(), params.bias);
}

SoftPrediction predict_proba(const ModelParams& params, std::span<const double> x) {
  return SoftPrediction::from_defective(sigmoid(logit(params, x)));
}

std::vector<double> predict_scores(const ModelParams& params, const ProjectDataset& data) {
  std::vector<double> scores;
  scores.reserve(data.size());
  for (const auto& inst : data.instances()) {
    scores.push_back(predict_proba(params, inst.features).defective());
  }
  return scores;
}

double ce_loss(const ModelParams& params, const ProjectDataset& data) {
  TrainSpec plain;
  return objective(params, data.instances(), plain);
}

double kl_div(const SoftPrediction& p, const SoftPrediction& q) {
  double total = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    if (p.p[c] > 0.0) {
      total += p.p[c] * std::log(p.p[c] / clamp_prob(q.p[c]));
    }
  }
  return total;
}

ModelParams kd_grad(const ModelParams& student, std::span<const double> x, const SoftPrediction& teacher) {
  const double residual = predict_proba(student, x).defective() - teacher.defective();
  ModelParams g{std::vector<double>(x.begin(), x.end()), 1.0};
  g *= residual;
  return g;
}

void TrainSpec::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorKind::InvalidArgument, "learning rate must be finite and non-negative");
  }
  if (batch_size == 0) {
    throw Error(ErrorKind::InvalidArgument, "batch size must be positive");
  }
  if (!(prox_mu >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "prox_mu must be non-negative");
  }
  if (prox_mu > 0.0 && !anchor) {
    throw Error(ErrorKind::InvalidArgument, "prox_mu > 0 requires an anchor model");
  }
}

double objective(const ModelParams& params, std::span<const Instance> batch, const TrainSpec& spec) {
  if (batch.empty()) {
    throw Error(ErrorKind::EmptyInput, "objective: no instances");
  }
  double loss = 0.0;
  for (const auto& inst : batch) {
    const double p1 = clamp_prob(predict_proba(params, inst.features).defective());
    loss -= inst.label == 1 ? std::log(p1) : std::log(1.0 - p1);
  }
  loss /= static_cast<double>(batch.size());
  if (spec.prox_mu > 0.0) {
    const ModelParams diff = params - *spec.anchor;
    double sq = diff.bias * diff.bias;
    for (double w : diff.weights) {
      sq += w * w;
    }
    loss += 0.5 * spec.prox_mu * sq;
  }
  return loss;
}

ModelParams objective_grad(const ModelParams& params, std::span<const Instance> batch, const TrainSpec& spec) {
  if (batch.empty()) {
    throw Error(ErrorKind::EmptyInput, "objective_grad: no instances");
  }
  ModelParams g = ModelParams::zeros(params.dimensionality());
  for (const auto& inst : batch) {
    const double residual = sigmoid(logit(params, inst.features)) - static_cast<double>(inst.label);
    for (std::size_t j = 0; j < g.weights.size(); ++j) {
      g.weights[j] += residual * inst.features[j];
    }
    g.bias += residual;
  }
  g *= 1.0 / static_cast<double>(batch.size());
  if (spec.prox_mu > 0.0) {
    g += spec.prox_mu * (params - *spec.anchor);
  }
  return g;
}

ModelParams local_train(const ModelParams& params, const ProjectDataset& data, const TrainSpec& spec, Rng& rng) {
  spec.validate();
  check_dims(params.dimensionality(), data.dimensionality(), "local_train");
  if (spec.anchor) {
    check_dims(params.dimensionality(), spec.anchor->dimensionality(), "local_train anchor");
  }
  ModelParams current = params;
  ModelParams g = ModelParams::zeros(params.dimensionality());
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += spec.batch_size) {
      const std::size_t stop = std::min(order.size(), start + spec.batch_size);
      // Same arithmetic as objective_grad, without materializing the batch.
      std::fill(g.weights.begin(), g.weights.end(), 0.0);
      g.bias = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const Instance& inst = data[order[k]];
        const double residual = sigmoid(logit(current, inst.features)) - static_cast<double>(inst.label);
        for (std::size_t j = 0; j < g.weights.size(); ++j) {
          g.weights[j] += residual * inst.features[j];
        }
        g.bias += residual;
      }
      g *= 1.0 / static_cast<double>(stop - start);
      if (spec.prox_mu > 0.0) {
        g += spec.prox_mu * (current - *spec.anchor);
      }
      for (std::size_t j = 0; j < current.weights.size(); ++j) {
        current.weights[j] -= spec.learning_rate * g.weights[j];
      }
      current.bias -= spec.learning_rate * g.bias;
    }
  }
  return current;
}

}  // namespace feddp
