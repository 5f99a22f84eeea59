// SPDX-License-Identifier: Apache-2.0

#include "feddp/synthetic.hpp"

#include <cmath>
#include <map>

#include "feddp/error.hpp"
#include "feddp/rng.hpp"

namespace feddp {

namespace {

constexpr std::uint64_t kMetricBase = 0x6d65747269630001ULL;
constexpr std::uint64_t kProjectShift = 0x7368696674000002ULL;
constexpr std::uint64_t kVersionRows = 0x726f777300000003ULL;

}  // namespace

std::size_t VersionLayout::defect_count() const noexcept {
  return static_cast<std::size_t>(std::lround(static_cast<double>(instances) * defect_percent / 100.0));
}

std::vector<VersionLayout> promise_layout() {
  return {
      {"ant", "1.6", 351, 26.21},      {"ant", "1.7", 745, 22.28},      {"camel", "1.4", 872, 16.63},
      {"camel", "1.6", 965, 19.48},    {"jedit", "4.0", 306, 24.51},    {"jedit", "4.1", 312, 25.32},
      {"lucene", "2.2", 247, 58.30},   {"lucene", "2.4", 340, 59.70},   {"xerces", "1.2", 440, 16.14},
      {"xerces", "1.3", 453, 15.23},   {"velocity", "1.5", 214, 66.35}, {"velocity", "1.6", 229, 34.06},
      {"xalan", "2.5", 803, 48.19},    {"xalan", "2.6", 885, 46.44},    {"synapse", "1.1", 222, 27.03},
      {"synapse", "1.2", 256, 33.59},  {"log4j", "1.0", 135, 25.18},    {"log4j", "1.1", 109, 33.94},
      {"poi", "2.5", 385, 64.41},      {"poi", "3.0", 442, 63.57},      {"ivy", "1.4", 241, 6.64},
      {"ivy", "2.0", 352, 11.36},      {"prop6", "", 660, 10.00},       {"redaktor", "", 176, 15.34},
      {"tomcat", "", 858, 8.97},
  };
}

std::vector<VersionLayout> softlab_layout() {
  return {
      {"ar1", "", 121, 7.44}, {"ar3", "", 63, 12.70}, {"ar4", "", 107, 18.69},
      {"ar5", "", 36, 22.22}, {"ar6", "", 101, 14.85},
  };
}

std::vector<ProjectDataset> generate_corpus(const std::vector<VersionLayout>& layout,
                                            const std::vector<std::string>& feature_names, std::uint64_t seed,
                                            const SyntheticOptions& options) {
  const std::size_t d = feature_names.size();
  if (d == 0) {
    throw Error(ErrorKind::InvalidArgument, "synthetic corpus needs at least one feature");
  }
  Rng base_rng(derive_seed(seed, {kMetricBase}));
  std::vector<double> base(d);
  std::vector<double> effect(d);
  for (std::size_t j = 0; j < d; ++j) {
    base[j] = 3.0 * base_rng.uniform01();
    effect[j] = options.signal * (0.5 + base_rng.uniform01());
  }

  std::map<std::string, std::vector<double>> shifts;
  std::uint64_t project_index = 0;
  std::vector<ProjectDataset> out;
  for (std::size_t v = 0; v < layout.size(); ++v) {
    const auto& entry = layout[v];
    const std::size_t defects = entry.defect_count();
    if (entry.instances == 0 || defects > entry.instances) {
      throw Error(ErrorKind::InvalidArgument, "bad layout for " + entry.project);
    }
    auto [it, inserted] = shifts.try_emplace(entry.project);
    if (inserted) {
      Rng shift_rng(derive_seed(seed, {kProjectShift, project_index++}));
      it->second.resize(d);
      for (auto& s : it->second) {
        s = options.project_shift * shift_rng.normal();
      }
    }
    const auto& shift = it->second;

    Rng rng(derive_seed(seed, {kVersionRows, v}));
    std::vector<int> labels(entry.instances, 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(defects), 1);
    rng.shuffle(labels);

    std::vector<Instance> rows;
    rows.reserve(entry.instances);
    for (int y : labels) {
      Instance row{std::vector<double>(d), y};
      for (std::size_t j = 0; j < d; ++j) {
        const double log_value = base[j] + shift[j] + (y ? effect[j] : 0.0) + options.noise * rng.normal();
        row.features[j] = std::round(std::exp(log_value) * 100.0) / 100.0;
      }
      rows.push_back(std::move(row));
    }
    out.emplace_back(entry.project, entry.version, feature_names, std::move(rows));
  }
  return out;
}

std::filesystem::path write_corpus(const std::vector<ProjectDataset>& datasets, const std::filesystem::path& dir,
                                   const std::string& label_column) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  }
  std::vector<ManifestEntry> entries;
  for (const auto& data : datasets) {
    const std::string file = data.label() + ".csv";
    save_project_csv(data, dir / file, label_column);
    entries.push_back({file, data.project(), data.version()});
  }
  const auto manifest = dir / "manifest.csv";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace feddp
