// SPDX-License-Identifier: Apache-2.0

// Slow, direct reference implementations used to check the library.

#ifndef FEDDP_TESTS_ORACLES_HPP
#define FEDDP_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "feddp/dataset.hpp"
#include "feddp/model.hpp"

namespace oracle {

// sum_k n_k w_k / sum_k n_k, coordinate by coordinate.
inline feddp::ModelParams weighted_mean(const std::vector<feddp::ModelParams>& models,
                                        const std::vector<std::size_t>& sizes) {
  double total = 0.0;
  for (auto s : sizes) {
    total += static_cast<double>(s);
  }
  feddp::ModelParams out = feddp::ModelParams::zeros(models.front().weights.size());
  for (std::size_t k = 0; k < models.size(); ++k) {
    const double w = static_cast<double>(sizes[k]) / total;
    for (std::size_t j = 0; j < out.weights.size(); ++j) {
      out.weights[j] += w * models[k].weights[j];
    }
    out.bias += w * models[k].bias;
  }
  return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) {
    return 0.0;
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// C_i = mean_j cos(distill_i, local_j), every pair visited.
inline std::vector<double> correlation(const feddp::ProjectDataset& local, const feddp::ProjectDataset& distill) {
  std::vector<double> out;
  for (const auto& d : distill.instances()) {
    double sum = 0.0;
    for (const auto& l : local.instances()) {
      sum += cosine(d.features, l.features);
    }
    out.push_back(sum / static_cast<double>(local.size()));
  }
  return out;
}

// Fraction of (positive, negative) pairs ordered correctly, ties count half.
// Returned as an exact ratio of integers so the comparison can be exact.
inline double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::uint64_t twice_wins = 0;
  std::uint64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        twice_wins += 2;
      } else if (scores[i] == scores[j]) {
        twice_wins += 1;
      }
    }
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pairs));
}

// Two-sided exact signed-rank p-value by enumerating every sign pattern.
inline double wilcoxon_enumerate(const std::vector<double>& diffs) {
  std::vector<double> d;
  for (double x : diffs) {
    if (x != 0.0) d.push_back(x);
  }
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0.0;
    double equal = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) below += 1.0;
      if (std::abs(d[j]) == std::abs(d[i])) equal += 1.0;
    }
    rank[i] = below + (equal + 1.0) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) observed += rank[i];
  }
  std::uint64_t le = 0;
  std::uint64_t ge = 0;
  const std::uint64_t patterns = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{1} << i)) w += rank[i];
    }
    if (w <= observed + 1e-9) ++le;
    if (w >= observed - 1e-9) ++ge;
  }
  const double tail = static_cast<double>(std::min(le, ge)) / static_cast<double>(patterns);
  return std::min(1.0, 2.0 * tail);
}

// Central difference of f along every coordinate of the flattened params.
inline std::vector<double> numeric_gradient(const std::function<double(const feddp::ModelParams&)>& f,
                                            const feddp::ModelParams& at, double h = 1e-5) {
  const auto flat = at.flatten();
  std::vector<double> grad(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    auto plus = flat;
    auto minus = flat;
    plus[i] += h;
    minus[i] -= h;
    grad[i] = (f(feddp::ModelParams::unflatten(plus)) - f(feddp::ModelParams::unflatten(minus))) / (2.0 * h);
  }
  return grad;
}

// Relative error with an absolute floor for near-zero components.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-3) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace oracle

#endif  // FEDDP_TESTS_ORACLES_HPP
