// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_DATASET_HPP
#define FEDDP_DATASET_HPP

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "feddp/rng.hpp"

namespace feddp {

/// One software module: static code metrics plus a binary defect label
/// (0 = clean, 1 = defective).
struct Instance {
  std::vector<double> features;
  int label = 0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// The instances of one project version. Construction validates that every
/// instance has the same dimensionality, finite features and a 0/1 label,
/// and that there is at least one instance; the object is immutable after.
class ProjectDataset {
 public:
  ProjectDataset(std::string project, std::string version,
                 std::vector<std::string> feature_names,
                 std::vector<Instance> instances);

  /// Feature names default to f0..f{d-1}.
  ProjectDataset(std::string project, std::string version, std::vector<Instance> instances);

  [[nodiscard]] const std::string& project() const noexcept { return project_; }
  [[nodiscard]] const std::string& version() const noexcept { return version_; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  [[nodiscard]] const std::vector<Instance>& instances() const noexcept { return instances_; }
  [[nodiscard]] const Instance& operator[](std::size_t i) const { return instances_[i]; }

  [[nodiscard]] std::size_t size() const noexcept { return instances_.size(); }
  [[nodiscard]] std::size_t dimensionality() const noexcept { return feature_names_.size(); }
  [[nodiscard]] std::size_t defect_count() const noexcept;
  [[nodiscard]] double defect_rate() const noexcept;

  /// "project-version", or just the project name when version is empty.
  [[nodiscard]] std::string label() const;

  /// Same metadata, new instances.
  [[nodiscard]] ProjectDataset with_instances(std::vector<Instance> instances) const;

  friend bool operator==(const ProjectDataset&, const ProjectDataset&) = default;

 private:
  void validate() const;

  std::string project_;
  std::string version_;
  std::vector<std::string> feature_names_;
  std::vector<Instance> instances_;
};

/// Concatenates datasets of equal dimensionality under a new name.
ProjectDataset concat(const std::vector<ProjectDataset>& parts, std::string project, std::string version = {});

// --- CSV ingestion --------------------------------------------------------

/// Maps CSV header names onto the label and the feature vector. When
/// `features` is empty every column other than the label and the `ignore`
/// list is a feature, in file order. Header matching is case-insensitive.
struct ColumnSchema {
  std::string label;
  std::vector<std::string> features;
  std::vector<std::string> ignore;

  /// 20 CK/OO metrics with the bug count in `bug`.
  static ColumnSchema promise();
  /// 29 Halstead/McCabe metrics with the defect count in `defects`.
  static ColumnSchema softlab();
};

/// Loads one project version. The label column holds a bug count (label is 1
/// iff the count is positive); `true`/`false` labels are accepted as well.
ProjectDataset load_project_csv(const std::filesystem::path& path, const ColumnSchema& schema,
                                const std::string& project, const std::string& version);

/// Writes features (full round-trip precision) followed by the binary label.
void save_project_csv(const ProjectDataset& data, const std::filesystem::path& path,
                      const std::string& label_column = "bug");

struct ManifestEntry {
  std::filesystem::path path;
  std::string project;
  std::string version;
};

/// Manifest lines are `path,project,version`; relative paths resolve against
/// the manifest's directory. Blank lines and lines starting with '#' are
/// skipped. Entry order defines version recency within a project.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries);
std::vector<ProjectDataset> load_manifest(const std::filesystem::path& manifest, const ColumnSchema& schema);

// --- Preprocessing --------------------------------------------------------

/// Random oversampling: minority instances are drawn uniformly with
/// replacement and appended until both classes have equal counts.
ProjectDataset oversample(const ProjectDataset& data, Rng& rng);

struct NormStats {
  std::vector<double> min;
  std::vector<double> max;
};

NormStats compute_norm_stats(const ProjectDataset& data);

/// Min-max scaling into [0, 1]; constant features map to 0 and values
/// outside the stats range are clamped.
ProjectDataset normalize(const ProjectDataset& data, const NormStats& stats);

// --- Non-IID categorization ----------------------------------------------

enum class Level { Low, Medium, High };

struct DistributionCategory {
  Level scale = Level::Medium;
  Level balance = Level::Medium;

  [[nodiscard]] std::string code() const;
  friend bool operator==(const DistributionCategory&, const DistributionCategory&) = default;
};

char level_letter(Level level) noexcept;

inline constexpr double kScaleLow = 0.5;
inline constexpr double kScaleHigh = 1.5;
inline constexpr double kBalanceLow = 0.1667;
inline constexpr double kBalanceHigh = 0.3333;

/// Scale compares instances/ideal against {0.5, 1.5}; balance compares the
/// raw defect rate against {0.1667, 0.3333}. Upper bounds are inclusive, so
/// a value exactly on a threshold takes the upper level of the lower band.
DistributionCategory categorize(std::size_t instances, double ideal, double defect_rate);

// --- Similarity -----------------------------------------------------------

/// dot(a, b) / (|a| |b|). Throws ZeroVector when either side is all zeros.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace feddp

#endif  // FEDDP_DATASET_HPP
