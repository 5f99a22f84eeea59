// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_CONFIG_HPP
#define FEDDP_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "feddp/dataset.hpp"
#include "feddp/federation.hpp"

namespace feddp {

enum class Algorithm { FedAvg, FedProx };

std::string_view to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(std::string_view text);

/// Unit paired by the Wilcoxon test when comparing two methods.
enum class PairingUnit {
  /// One value per repeat (the repeat's window-averaged metric).
  Repeats,
  /// Every in-window round of every repeat.
  Rounds,
};

std::string_view to_string(PairingUnit p) noexcept;
PairingUnit parse_pairing(std::string_view text);

/// Everything that defines one experiment. The file form is a flat
/// `key = value` document using the field names below; `#` starts a
/// comment.
struct ExperimentConfig {
  std::filesystem::path manifest;
  /// `promise`, `softlab`, or `auto` (every non-label column is a feature).
  std::string schema = "promise";
  /// Overrides the schema's label column when non-empty.
  std::string label_column;
  std::string distillation_project = "camel";
  /// Empty or `*` runs every project except the distillation project.
  std::string test_project;

  Mode mode = Mode::FedDP;
  Algorithm algorithm = Algorithm::FedProx;
  /// Ablation switch: false gives every participant equal teacher weight.
  bool use_correlation_factors = true;

  std::size_t local_epochs = 10;
  std::size_t rounds = 50;
  std::size_t distill_steps = 10;
  std::size_t sample_size = 700;
  double participation = 1.0;
  double learning_rate = 0.001;
  double server_learning_rate = 0.001;
  double prox_mu = 0.01;
  std::size_t batch_size = 32;
  double threshold = 0.5;

  std::size_t repeats = 5;
  /// Metrics of the last `window` rounds are averaged into a repeat result.
  std::size_t window = 10;
  std::uint64_t seed = 42;
  PairingUnit pairing = PairingUnit::Repeats;

  std::filesystem::path results_dir = "results";

  /// "FedDP-FedProx", "FLR-FedAvg", "Centralized", ... plus "-nofactor"
  /// for the uniform-teacher ablation.
  [[nodiscard]] std::string method_label() const;
  [[nodiscard]] ColumnSchema column_schema() const;
  [[nodiscard]] RoundConfig round_config() const;
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Sets one field from its textual value; unknown keys are an error.
void apply_override(ExperimentConfig& config, std::string_view key, std::string_view value);

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Inverse of parse_config: every field, one `key = value` per line.
std::string render_config(const ExperimentConfig& config);

/// Environment variable that overrides results_dir.
inline constexpr const char* kResultsDirEnv = "FEDDP_RESULTS_DIR";
void apply_environment(ExperimentConfig& config);

}  // namespace feddp

#endif  // FEDDP_CONFIG_HPP
