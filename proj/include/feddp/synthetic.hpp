// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_SYNTHETIC_HPP
#define FEDDP_SYNTHETIC_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "feddp/dataset.hpp"

namespace feddp {

/// Shape of one project version: instance count and defect rate in percent.
struct VersionLayout {
  std::string project;
  std::string version;
  std::size_t instances = 0;
  double defect_percent = 0.0;

  /// round(instances * defect_percent / 100).
  [[nodiscard]] std::size_t defect_count() const noexcept;
};

/// The 25 Promise versions (14 projects) and 5 Softlab projects with their
/// published sizes and defect rates, in version order.
std::vector<VersionLayout> promise_layout();
std::vector<VersionLayout> softlab_layout();

struct SyntheticOptions {
  /// Std of the per-project log-scale shift of every metric.
  double project_shift = 0.6;
  /// Mean log-scale increase of metrics on defective modules.
  double signal = 0.7;
  /// Per-instance log-scale noise.
  double noise = 1.0;
};

/// Lognormal metric vectors with exactly defect_count() defective rows per
/// version. Versions of one project share a shift, so projects differ in
/// distribution. Stand-in data for exercising the pipeline only.
std::vector<ProjectDataset> generate_corpus(const std::vector<VersionLayout>& layout,
                                            const std::vector<std::string>& feature_names, std::uint64_t seed,
                                            const SyntheticOptions& options = {});

/// Writes one CSV per version plus manifest.csv into `dir`; returns the
/// manifest path.
std::filesystem::path write_corpus(const std::vector<ProjectDataset>& datasets, const std::filesystem::path& dir,
                                   const std::string& label_column);

}  // namespace feddp

#endif  // FEDDP_SYNTHETIC_HPP
