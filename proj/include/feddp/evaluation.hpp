// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_EVALUATION_HPP
#define FEDDP_EVALUATION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "feddp/dataset.hpp"
#include "feddp/model.hpp"

namespace feddp {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

inline constexpr double kDefaultThreshold = 0.5;

/// An instance is predicted defective iff its score is >= threshold.
ConfusionCounts confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold = kDefaultThreshold);

struct ClassificationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Ratios with a zero denominator are reported as 0.
ClassificationMetrics metrics(const ConfusionCounts& counts);

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction of
/// (defective, clean) pairs ordered correctly, ties counting one half.
double auc(std::span<const double> scores, std::span<const int> labels);

/// All values are fractions in [0, 1]; rendering multiplies by 100.
struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport evaluate(const ModelParams& params, const ProjectDataset& test, double threshold = kDefaultThreshold);

// --- Significance ---------------------------------------------------------

/// Sample sizes up to this use the exact null distribution.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

struct WilcoxonResult {
  double p_value = 1.0;
  /// Sum of ranks of the positive differences (a - b > 0).
  double w_plus = 0.0;
  /// Pairs left after dropping zero differences.
  std::size_t n_effective = 0;
  bool exact = true;
  /// Fewer than two non-zero differences: the test cannot reject.
  bool degenerate = false;
};

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped and tied |differences| share their average rank. Exact when
/// n_effective <= exact_limit, otherwise a tie-corrected normal
/// approximation with continuity correction. Throws AllZeroDifferences.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    std::size_t exact_limit = kWilcoxonExactLimit);

enum class Verdict { Win, Tie, Loss };

std::string_view to_string(Verdict v) noexcept;

inline constexpr double kSignificanceLevel = 0.05;

struct SignificanceVerdict {
  double p_value = 1.0;
  Verdict verdict = Verdict::Tie;
};

/// Win/Loss only when p < 0.05 and one mean is strictly better.
SignificanceVerdict win_tie_loss(double p_value, double mean_ours, double mean_baseline);

// --- Communication efficiency ----------------------------------------------

/// Rounds needed to stably reach a target; empty `rounds` means the target
/// was not reached within the horizon (rendered ">T").
struct RoundsToTarget {
  std::optional<double> rounds;
  std::size_t horizon = 0;

  [[nodiscard]] bool censored() const noexcept { return !rounds.has_value(); }
  /// One decimal ("2.2"), or ">T" when censored.
  [[nodiscard]] std::string render() const;
};

/// Smallest 1-based round r with series[r'] >= target for every r' >= r.
RoundsToTarget rounds_to_target(std::span<const double> f1_series, double target, std::size_t horizon);

/// Arithmetic mean over repeats; censored if any repeat is censored.
RoundsToTarget mean_rounds(std::span<const RoundsToTarget> repeats);

}  // namespace feddp

#endif  // FEDDP_EVALUATION_HPP
