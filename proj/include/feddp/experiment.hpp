// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_EXPERIMENT_HPP
#define FEDDP_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feddp/config.hpp"
#include "feddp/dataset.hpp"
#include "feddp/evaluation.hpp"
#include "feddp/federation.hpp"

namespace feddp {

/// The three partitions of one cross-project run, already preprocessed:
/// clients are oversampled then normalized, distillation and test data are
/// only normalized. All scaling uses stats of the raw distillation data.
struct Scenario {
  std::vector<ProjectDataset> clients;
  ProjectDataset distillation;
  ProjectDataset test;
  NormStats stats;
};

/// Projects in first-appearance order.
std::vector<std::string> project_names(const std::vector<ProjectDataset>& datasets);

/// Test projects of a run: config.test_project, or every project other
/// than the distillation project when it is empty or "*".
std::vector<std::string> test_projects(const ExperimentConfig& config, const std::vector<ProjectDataset>& datasets);

/// Splits the manifest datasets for one (test, distillation) pairing. The
/// test set is the test project's latest version (last in manifest order);
/// none of the test or distillation project's versions become clients.
Scenario build_scenario(const ExperimentConfig& config, const std::vector<ProjectDataset>& datasets,
                        std::uint64_t oversample_seed);

struct RepeatResult {
  std::uint64_t seed = 0;
  /// Mean of the last `window` rounds.
  MetricsReport metrics;
  /// One record per round, with test metrics attached.
  std::vector<RoundRecord> rounds;

  friend bool operator==(const RepeatResult&, const RepeatResult&) = default;
};

enum class Metric { Precision, Recall, F1, AUC };

std::string_view to_string(Metric m) noexcept;
Metric parse_metric(std::string_view text);
double metric_value(const MetricsReport& report, Metric m) noexcept;

struct SignificanceEntry {
  std::string baseline;
  Metric metric = Metric::F1;
  double p_value = 1.0;
  Verdict verdict = Verdict::Tie;
  bool degenerate = false;

  friend bool operator==(const SignificanceEntry&, const SignificanceEntry&) = default;
};

struct ExperimentReport {
  std::string method;
  std::string test_project;
  std::string test_version;
  std::vector<RepeatResult> repeats;
  /// Mean and sample standard deviation over repeats; empty without repeats.
  std::optional<MetricsReport> mean;
  std::optional<MetricsReport> stddev;
  std::vector<SignificanceEntry> significance;
  ExperimentConfig config;

  /// Per-repeat values of one metric.
  [[nodiscard]] std::vector<double> repeat_values(Metric m) const;
  /// In-window per-round values of one metric, repeat-major.
  [[nodiscard]] std::vector<double> window_values(Metric m) const;
  /// Full per-round series of one metric for one repeat.
  [[nodiscard]] std::vector<double> series(std::size_t repeat, Metric m) const;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

/// Fills mean/stddev from the repeats.
void summarize(ExperimentReport& report);

/// Optional observer for streaming round logs.
using RoundObserver = std::function<void(std::size_t repeat, const RoundRecord&)>;

/// Runs config.repeats independent repeats for the single test project
/// config.test_project. Each repeat draws its seed from the master seed,
/// rebuilds the scenario (oversampling is repeat-specific), starts from a
/// zero model and evaluates the global model on the test set every round.
/// Centralized mode trains one model on the pooled client data plus the
/// distillation data for local_epochs * rounds epochs, evaluating every
/// local_epochs epochs.
ExperimentReport run_experiment(const ExperimentConfig& config, const std::vector<ProjectDataset>& datasets,
                                const RoundObserver& observer = {});

/// run_experiment for every test project; keyed by project name.
std::map<std::string, ExperimentReport> run_all_projects(const ExperimentConfig& config,
                                                         const std::vector<ProjectDataset>& datasets,
                                                         const RoundObserver& observer = {});

// --- Significance tables ---------------------------------------------------

struct ComparisonCell {
  std::string project;
  std::string baseline;
  double mean_ours = 0.0;
  double mean_baseline = 0.0;
  WilcoxonResult test;
  SignificanceVerdict verdict;
};

/// Wilcoxon + Win/Tie/Loss of `ours` against every other method of one test
/// project. All reports must share the test project and repeat count
/// (RepeatMismatch otherwise). Identical samples yield p = 1, flagged
/// degenerate.
std::vector<ComparisonCell> compare_methods(const std::map<std::string, ExperimentReport>& reports,
                                            const std::string& ours, Metric metric, PairingUnit pairing);

struct WinTieLoss {
  std::size_t win = 0;
  std::size_t tie = 0;
  std::size_t loss = 0;
};

struct SignificanceTable {
  Metric metric = Metric::F1;
  std::string ours;
  std::vector<std::string> methods;
  std::vector<std::string> baselines;
  std::vector<std::string> projects;
  /// reports[project][method] mean and std of the metric.
  std::map<std::string, std::map<std::string, std::pair<double, double>>> values;
  std::vector<ComparisonCell> cells;
  std::map<std::string, std::pair<double, double>> averages;
  std::map<std::string, WinTieLoss> tallies;

  /// Rows of two-decimal percentages, p-values, Avg. & W/T/L.
  [[nodiscard]] std::string render() const;
};

/// by_method[method][project] -> report.
SignificanceTable build_significance_table(
    const std::map<std::string, std::map<std::string, ExperimentReport>>& by_method, const std::string& ours,
    Metric metric, PairingUnit pairing);

// --- Communication efficiency ----------------------------------------------

struct EfficiencyRow {
  std::string project;
  double target = 0.0;
  /// method -> mean rounds over repeats.
  std::map<std::string, RoundsToTarget> rounds;
};

/// Rounds to stably reach each F1 target, averaged over repeats with
/// censoring; `reports` maps method -> report of one test project.
std::vector<EfficiencyRow> communication_efficiency(const std::map<std::string, ExperimentReport>& reports,
                                                    const std::vector<double>& targets);

std::string render_efficiency(const std::vector<EfficiencyRow>& rows);

/// Variants compared in the ablation: full method, without correlation
/// factors, and without factors and distillation (plain FLR).
std::vector<ExperimentConfig> ablation_variants(const ExperimentConfig& base);

/// Two decimals of a fraction rendered as a percentage: 0.491372 -> "49.14".
std::string format_percent(double fraction);

}  // namespace feddp

#endif  // FEDDP_EXPERIMENT_HPP
