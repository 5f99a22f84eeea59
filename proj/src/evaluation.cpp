// SPDX-License-Identifier: Apache-2.0

#include "feddp/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <vector>

#include "feddp/error.hpp"

namespace feddp {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch, std::string(what) + ": lengths differ (" + std::to_string(a) +
                                               " vs " + std::to_string(b) + ")");
  }
  if (a == 0) {
    throw Error(ErrorKind::EmptyInput, std::string(what) + ": empty input");
  }
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// Average 1-based ranks of `values`, doubled so ties stay integral.
std::vector<std::uint64_t> doubled_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
  std::vector<std::uint64_t> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    // Ranks i+1 .. j+1 share (i+1 + j+1) / 2; doubled that is i + j + 2.
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = i + j + 2;
    }
    i = j + 1;
  }
  return ranks;
}

}  // namespace

ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_lengths(scores.size(), labels.size(), "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] == 1;
    if (predicted && actual) {
      ++c.tp;
    } else if (predicted) {
      ++c.fp;
    } else if (actual) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

ClassificationMetrics metrics(const ConfusionCounts& counts) {
  ClassificationMetrics m;
  m.precision = ratio(counts.tp, counts.tp + counts.fp);
  m.recall = ratio(counts.tp, counts.tp + counts.fn);
  const double sum = m.precision + m.recall;
  m.f1 = sum > 0.0 ? 2.0 * m.precision * m.recall / sum : 0.0;
  return m;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_lengths(scores.size(), labels.size(), "auc");
  std::vector<double> values(scores.begin(), scores.end());
  const auto ranks = doubled_ranks(values);
  std::uint64_t n_pos = 0;
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++n_pos;
      rank_sum2 += ranks[i];
    }
  }
  const std::uint64_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorKind::SingleClass, "auc requires both classes");
  }
  // 2U = 2R_pos - n_pos(n_pos + 1); integral, so the only rounding is the
  // final division.
  const std::uint64_t u2 = rank_sum2 - n_pos * (n_pos + 1);
  return static_cast<double>(u2) / 2.0 / static_cast<double>(n_pos * n_neg);
}

MetricsReport evaluate(const ModelParams& params, const ProjectDataset& test, double threshold) {
  const auto scores = predict_scores(params, test);
  std::vector<int> labels;
  labels.reserve(test.size());
  for (const auto& inst : test.instances()) {
    labels.push_back(inst.label);
  }
  const auto m = metrics(confusion(scores, labels, threshold));
  return {m.precision, m.recall, m.f1, auc(scores, labels)};
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    std::size_t exact_limit) {
  check_lengths(a.size(), b.size(), "wilcoxon_signed_rank");
  if (a.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "wilcoxon_signed_rank needs at least two pairs");
  }
  std::vector<double> magnitudes;
  std::vector<bool> positive;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (d != 0.0) {
      magnitudes.push_back(std::abs(d));
      positive.push_back(d > 0.0);
    }
  }
  const std::size_t n = magnitudes.size();
  if (n == 0) {
    throw Error(ErrorKind::AllZeroDifferences, "wilcoxon_signed_rank: all differences are zero");
  }
  const auto ranks = doubled_ranks(magnitudes);
  std::uint64_t w2 = 0;
  std::uint64_t total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += ranks[i];
    if (positive[i]) {
      w2 += ranks[i];
    }
  }

  WilcoxonResult result;
  result.w_plus = static_cast<double>(w2) / 2.0;
  result.n_effective = n;
  result.degenerate = n < 2;

  if (n <= exact_limit) {
    // Null distribution of the doubled statistic: every rank enters with
    // probability 1/2. counts[s] = number of sign assignments with sum s.
    std::vector<double> counts(total2 + 1, 0.0);
    counts[0] = 1.0;
    std::uint64_t reach = 0;
    for (std::uint64_t r : ranks) {
      for (std::uint64_t s = reach + 1; s-- > 0;) {
        if (counts[s] != 0.0) {
          counts[s + r] += counts[s];
        }
      }
      reach += r;
    }
    double lower = 0.0;
    double upper = 0.0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= w2) {
        lower += counts[s];
      }
      if (s >= w2) {
        upper += counts[s];
      }
    }
    const double denom = std::ldexp(1.0, static_cast<int>(n));
    result.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / denom);
    result.exact = true;
    return result;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) {
        ++j;
      }
      const double t = static_cast<double>(j - i + 1);
      tie_term += t * t * t - t;
      i = j + 1;
    }
  }
  const double variance = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double deviation = result.w_plus - mean;
  const double corrected = std::max(0.0, std::abs(deviation) - 0.5);
  const double z = variance > 0.0 ? corrected / std::sqrt(variance) : 0.0;
  result.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  result.exact = false;
  return result;
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Win: return "Win";
    case Verdict::Tie: return "Tie";
    case Verdict::Loss: return "Loss";
  }
  return "?";
}

SignificanceVerdict win_tie_loss(double p_value, double mean_ours, double mean_baseline) {
  if (!(p_value >= 0.0 && p_value <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "win_tie_loss: p-value outside [0, 1]");
  }
  SignificanceVerdict v{p_value, Verdict::Tie};
  if (p_value < kSignificanceLevel) {
    if (mean_ours > mean_baseline) {
      v.verdict = Verdict::Win;
    } else if (mean_baseline > mean_ours) {
      v.verdict = Verdict::Loss;
    }
  }
  return v;
}

std::string RoundsToTarget::render() const {
  if (!rounds) {
    return ">" + std::to_string(horizon);
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", *rounds);
  return buf;
}

RoundsToTarget rounds_to_target(std::span<const double> f1_series, double target, std::size_t horizon) {
  if (f1_series.size() != horizon) {
    throw Error(ErrorKind::LengthMismatch, "rounds_to_target: series length " +
                                               std::to_string(f1_series.size()) + " != horizon " +
                                               std::to_string(horizon));
  }
  std::size_t first_stable = f1_series.size();
  while (first_stable > 0 && f1_series[first_stable - 1] >= target) {
    --first_stable;
  }
  if (first_stable == f1_series.size()) {
    return {std::nullopt, horizon};
  }
  return {static_cast<double>(first_stable + 1), horizon};
}

RoundsToTarget mean_rounds(std::span<const RoundsToTarget> repeats) {
  if (repeats.empty()) {
    throw Error(ErrorKind::EmptyInput, "mean_rounds: no repeats");
  }
  double total = 0.0;
  for (const auto& r : repeats) {
    if (r.censored()) {
      return {std::nullopt, r.horizon};
    }
    total += *r.rounds;
  }
  return {total / static_cast<double>(repeats.size()), repeats.front().horizon};
}

}  // namespace feddp
