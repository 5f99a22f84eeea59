// SPDX-License-Identifier: Apache-2.0

#include "feddp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "feddp/error.hpp"

namespace feddp {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Comma-separated fields; a field wrapped in double quotes may contain commas
// and "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') {
    text.remove_prefix(1);
  }
  if (text.empty()) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_label(std::string_view text, int& out) {
  const std::string token = lower(trim(text));
  if (token == "true" || token == "yes" || token == "y") {
    out = 1;
    return true;
  }
  if (token == "false" || token == "no" || token == "n") {
    out = 0;
    return true;
  }
  double count = 0.0;
  if (!parse_double(token, count)) {
    return false;
  }
  out = count > 0.0 ? 1 : 0;
  return true;
}

std::vector<std::string> default_names(std::size_t d) {
  std::vector<std::string> names;
  names.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    names.push_back("f" + std::to_string(j));
  }
  return names;
}

void check_dims(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": expected dimensionality " +
                                                  std::to_string(expected) + ", got " +
                                                  std::to_string(actual));
  }
}

}  // namespace

ProjectDataset::ProjectDataset(std::string project, std::string version,
                               std::vector<std::string> feature_names,
                               std::vector<Instance> instances)
    : project_(std::move(project)),
      version_(std::move(version)),
      feature_names_(std::move(feature_names)),
      instances_(std::move(instances)) {
  validate();
}

ProjectDataset::ProjectDataset(std::string project, std::string version, std::vector<Instance> instances)
    : project_(std::move(project)), version_(std::move(version)), instances_(std::move(instances)) {
  feature_names_ = default_names(instances_.empty() ? 0 : instances_.front().features.size());
  validate();
}

void ProjectDataset::validate() const {
  if (instances_.empty()) {
    throw Error(ErrorKind::EmptyInput, "dataset " + label() + " has no instances");
  }
  const std::size_t d = feature_names_.size();
  for (std::size_t i = 0; i < instances_.size(); ++i) {
    const Instance& inst = instances_[i];
    if (inst.features.size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "dataset " + label() + ": instance " + std::to_string(i) +
                                                    " has " + std::to_string(inst.features.size()) +
                                                    " features, expected " + std::to_string(d));
    }
    if (inst.label != 0 && inst.label != 1) {
      throw Error(ErrorKind::InvalidArgument, "dataset " + label() + ": label must be 0 or 1");
    }
    if (!std::all_of(inst.features.begin(), inst.features.end(), [](double v) { return std::isfinite(v); })) {
      throw Error(ErrorKind::InvalidArgument, "dataset " + label() + ": non-finite feature value");
    }
  }
}

std::size_t ProjectDataset::defect_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(instances_.begin(), instances_.end(), [](const Instance& i) { return i.label == 1; }));
}

double ProjectDataset::defect_rate() const noexcept {
  return static_cast<double>(defect_count()) / static_cast<double>(instances_.size());
}

std::string ProjectDataset::label() const {
  return version_.empty() ? project_ : project_ + "-" + version_;
}

ProjectDataset ProjectDataset::with_instances(std::vector<Instance> instances) const {
  return ProjectDataset(project_, version_, feature_names_, std::move(instances));
}

ProjectDataset concat(const std::vector<ProjectDataset>& parts, std::string project, std::string version) {
  if (parts.empty()) {
    throw Error(ErrorKind::EmptyInput, "concat: no datasets");
  }
  std::vector<Instance> all;
  for (const auto& part : parts) {
    check_dims(parts.front().dimensionality(), part.dimensionality(), "concat");
    all.insert(all.end(), part.instances().begin(), part.instances().end());
  }
  return ProjectDataset(std::move(project), std::move(version), parts.front().feature_names(), std::move(all));
}

ColumnSchema ColumnSchema::promise() {
  return {"bug",
          {"wmc", "dit", "noc", "cbo", "rfc", "lcom", "ca", "ce", "npm", "lcom3", "loc", "dam", "moa", "mfa",
           "cam", "ic", "cbm", "amc", "max_cc", "avg_cc"},
          {}};
}

ColumnSchema ColumnSchema::softlab() {
  return {"defects",
          {"total_loc", "blank_loc", "comment_loc", "code_and_comment_loc", "executable_loc", "unique_operands",
           "unique_operators", "total_operands", "total_operators", "halstead_vocabulary", "halstead_length",
           "halstead_volume", "halstead_level", "halstead_difficulty", "halstead_effort", "halstead_error",
           "halstead_time", "branch_count", "decision_count", "call_pairs", "condition_count",
           "multiple_condition_count", "cyclomatic_complexity", "cyclomatic_density", "decision_density",
           "design_complexity", "design_density", "normalized_cyclomatic_complexity", "formal_parameters"},
          {}};
}

ProjectDataset load_project_csv(const std::filesystem::path& path, const ColumnSchema& schema,
                                const std::string& project, const std::string& version) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) {
    throw Error(ErrorKind::EmptyFile, path.string() + " has no header row");
  }
  if (!header.empty() && header.front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header.front().erase(0, 3);
  }

  auto find_column = [&](const std::string& name) -> std::size_t {
    const std::string key = lower(name);
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (lower(header[c]) == key) {
        return c;
      }
    }
    throw Error(ErrorKind::MissingColumn, path.string() + ": missing column '" + name + "'");
  };

  const std::size_t label_col = find_column(schema.label);
  std::vector<std::size_t> feature_cols;
  if (!schema.features.empty()) {
    for (const auto& name : schema.features) {
      feature_cols.push_back(find_column(name));
    }
  } else {
    std::vector<std::string> ignored;
    for (const auto& name : schema.ignore) {
      ignored.push_back(lower(name));
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string key = lower(header[c]);
      if (c != label_col && std::find(ignored.begin(), ignored.end(), key) == ignored.end()) {
        feature_cols.push_back(c);
      }
    }
  }
  if (feature_cols.empty()) {
    throw Error(ErrorKind::MissingColumn, path.string() + ": schema selects no feature columns");
  }
  std::vector<std::string> names;
  for (std::size_t c : feature_cols) {
    names.push_back(header[c]);
  }

  std::vector<Instance> instances;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    auto cell = [&](std::size_t c) -> const std::string& {
      if (c >= fields.size()) {
        throw Error(ErrorKind::NonNumericCell, path.string() + ": row " + std::to_string(row) + ", column '" +
                                                   header[c] + "' is missing");
      }
      return fields[c];
    };
    Instance inst;
    inst.features.reserve(feature_cols.size());
    for (std::size_t c : feature_cols) {
      double value = 0.0;
      if (!parse_double(cell(c), value)) {
        throw Error(ErrorKind::NonNumericCell, path.string() + ": row " + std::to_string(row) + ", column '" +
                                                   header[c] + "' is not numeric: '" + cell(c) + "'");
      }
      inst.features.push_back(value);
    }
    if (!parse_label(cell(label_col), inst.label)) {
      throw Error(ErrorKind::NonNumericCell, path.string() + ": row " + std::to_string(row) + ", column '" +
                                                 header[label_col] + "' is not numeric: '" + cell(label_col) +
                                                 "'");
    }
    instances.push_back(std::move(inst));
  }
  if (instances.empty()) {
    throw Error(ErrorKind::EmptyFile, path.string() + " has no data rows");
  }
  return ProjectDataset(project, version, std::move(names), std::move(instances));
}

void save_project_csv(const ProjectDataset& data, const std::filesystem::path& path,
                      const std::string& label_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write " + path.string());
  }
  for (const auto& name : data.feature_names()) {
    out << name << ',';
  }
  out << label_column << '\n';
  char buf[64];
  for (const auto& inst : data.instances()) {
    for (double v : inst.features) {
      const auto res = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    out << inst.label << '\n';
  }
  if (!out) {
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open manifest " + manifest.string());
  }
  const auto base = manifest.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') {
      continue;
    }
    auto fields = split_csv_line(body);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw Error(ErrorKind::ParseError, manifest.string() + ":" + std::to_string(lineno) +
                                             ": expected 'path,project,version'");
    }
    std::filesystem::path p = fields[0];
    if (p.is_relative()) {
      p = base / p;
    }
    entries.push_back({p, fields[1], fields.size() == 3 ? fields[2] : std::string{}});
  }
  if (entries.empty()) {
    throw Error(ErrorKind::EmptyFile, "manifest " + manifest.string() + " lists no datasets");
  }
  return entries;
}

void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(manifest, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write manifest " + manifest.string());
  }
  out << "# path,project,version\n";
  for (const auto& e : entries) {
    out << e.path.generic_string() << ',' << e.project << ',' << e.version << '\n';
  }
}

std::vector<ProjectDataset> load_manifest(const std::filesystem::path& manifest, const ColumnSchema& schema) {
  std::vector<ProjectDataset> out;
  for (const auto& entry : read_manifest(manifest)) {
    out.push_back(load_project_csv(entry.path, schema, entry.project, entry.version));
  }
  return out;
}

ProjectDataset oversample(const ProjectDataset& data, Rng& rng) {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (data[i].label == 1 ? positives : negatives).push_back(i);
  }
  if (positives.empty() || negatives.empty()) {
    throw Error(ErrorKind::SingleClassDataset, "cannot oversample single-class dataset " + data.label());
  }
  const auto& minority = positives.size() < negatives.size() ? positives : negatives;
  const std::size_t deficit =
      std::max(positives.size(), negatives.size()) - std::min(positives.size(), negatives.size());

  std::vector<Instance> out = data.instances();
  out.reserve(data.size() + deficit);
  for (std::size_t k = 0; k < deficit; ++k) {
    out.push_back(data[minority[rng.uniform_index(minority.size())]]);
  }
  return data.with_instances(std::move(out));
}

NormStats compute_norm_stats(const ProjectDataset& data) {
  NormStats stats{data[0].features, data[0].features};
  for (const auto& inst : data.instances()) {
    for (std::size_t j = 0; j < inst.features.size(); ++j) {
      stats.min[j] = std::min(stats.min[j], inst.features[j]);
      stats.max[j] = std::max(stats.max[j], inst.features[j]);
    }
  }
  return stats;
}

ProjectDataset normalize(const ProjectDataset& data, const NormStats& stats) {
  check_dims(stats.min.size(), data.dimensionality(), "normalize");
  check_dims(stats.max.size(), data.dimensionality(), "normalize");
  std::vector<Instance> out = data.instances();
  for (auto& inst : out) {
    for (std::size_t j = 0; j < inst.features.size(); ++j) {
      const double range = stats.max[j] - stats.min[j];
      inst.features[j] = range > 0.0 ? std::clamp((inst.features[j] - stats.min[j]) / range, 0.0, 1.0) : 0.0;
    }
  }
  return data.with_instances(std::move(out));
}

char level_letter(Level level) noexcept {
  switch (level) {
    case Level::Low: return 'L';
    case Level::Medium: return 'M';
    case Level::High: return 'H';
  }
  return '?';
}

std::string DistributionCategory::code() const {
  return {level_letter(scale), level_letter(balance)};
}

DistributionCategory categorize(std::size_t instances, double ideal, double defect_rate) {
  if (!(ideal > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "categorize: ideal must be positive");
  }
  if (!(defect_rate >= 0.0 && defect_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "categorize: defect rate outside [0, 1]");
  }
  auto level = [](double value, double low, double high) {
    if (value < low) {
      return Level::Low;
    }
    return value <= high ? Level::Medium : Level::High;
  };
  const double ratio = static_cast<double>(instances) / ideal;
  return {level(ratio, kScaleLow, kScaleHigh), level(defect_rate, kBalanceLow, kBalanceHigh)};
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  check_dims(a.size(), b.size(), "cosine_similarity");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorKind::ZeroVector, "cosine similarity of a zero vector is undefined");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace feddp
