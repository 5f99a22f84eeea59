// SPDX-License-Identifier: Apache-2.0

#include "feddp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "feddp/error.hpp"

namespace feddp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorKind::ParseError, "invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    bad_value(key, value);
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (iequals(value, "true") || value == "1" || iequals(value, "yes") || iequals(value, "on")) {
    return true;
  }
  if (iequals(value, "false") || value == "0" || iequals(value, "no") || iequals(value, "off")) {
    return false;
  }
  bad_value(key, value);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view to_string(Algorithm a) noexcept {
  return a == Algorithm::FedAvg ? "FedAvg" : "FedProx";
}

Algorithm parse_algorithm(std::string_view text) {
  if (iequals(text, "FedAvg")) {
    return Algorithm::FedAvg;
  }
  if (iequals(text, "FedProx")) {
    return Algorithm::FedProx;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown algorithm '" + std::string(text) + "'");
}

std::string_view to_string(PairingUnit p) noexcept {
  return p == PairingUnit::Repeats ? "repeats" : "rounds";
}

PairingUnit parse_pairing(std::string_view text) {
  if (iequals(text, "repeats")) {
    return PairingUnit::Repeats;
  }
  if (iequals(text, "rounds")) {
    return PairingUnit::Rounds;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown pairing unit '" + std::string(text) + "'");
}

std::string ExperimentConfig::method_label() const {
  if (mode == Mode::Centralized) {
    return "Centralized";
  }
  std::string label = std::string(to_string(mode)) + "-" + std::string(to_string(algorithm));
  if (mode == Mode::FedDP && !use_correlation_factors) {
    label += "-nofactor";
  }
  return label;
}

ColumnSchema ExperimentConfig::column_schema() const {
  ColumnSchema s;
  if (iequals(schema, "promise")) {
    s = ColumnSchema::promise();
  } else if (iequals(schema, "softlab")) {
    s = ColumnSchema::softlab();
  } else if (iequals(schema, "auto")) {
    s = ColumnSchema{"bug", {}, {"name", "version", "name.1"}};
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown schema '" + schema + "'");
  }
  if (!label_column.empty()) {
    s.label = label_column;
  }
  return s;
}

RoundConfig ExperimentConfig::round_config() const {
  RoundConfig rc;
  rc.mode = mode;
  rc.participation = participation;
  rc.local_epochs = local_epochs;
  rc.batch_size = batch_size;
  rc.learning_rate = learning_rate;
  rc.server_learning_rate = server_learning_rate;
  rc.prox_mu = algorithm == Algorithm::FedProx ? prox_mu : 0.0;
  rc.distill_steps = distill_steps;
  rc.sample_size = sample_size;
  rc.weighting = use_correlation_factors ? TeacherWeighting::Correlation : TeacherWeighting::Uniform;
  return rc;
}

void ExperimentConfig::validate() const {
  if (rounds == 0) {
    throw Error(ErrorKind::InvalidArgument, "rounds must be positive");
  }
  if (repeats == 0) {
    throw Error(ErrorKind::InvalidArgument, "repeats must be positive");
  }
  if (window == 0) {
    throw Error(ErrorKind::InvalidArgument, "window must be positive");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must lie in [0, 1]");
  }
  if (distillation_project.empty()) {
    throw Error(ErrorKind::InvalidArgument, "distillation_project is required");
  }
  (void)column_schema();
  if (mode != Mode::Centralized) {
    round_config().validate();
  }
}

void apply_override(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "manifest") {
    c.manifest = std::string(value);
  } else if (key == "schema") {
    c.schema = value;
  } else if (key == "label_column") {
    c.label_column = value;
  } else if (key == "distillation_project") {
    c.distillation_project = value;
  } else if (key == "test_project") {
    c.test_project = value;
  } else if (key == "mode") {
    c.mode = parse_mode(value);
  } else if (key == "algorithm") {
    c.algorithm = parse_algorithm(value);
  } else if (key == "use_correlation_factors") {
    c.use_correlation_factors = parse_bool(key, value);
  } else if (key == "local_epochs" || key == "E") {
    c.local_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "rounds" || key == "T") {
    c.rounds = parse_number<std::size_t>(key, value);
  } else if (key == "distill_steps" || key == "N") {
    c.distill_steps = parse_number<std::size_t>(key, value);
  } else if (key == "sample_size" || key == "p") {
    c.sample_size = parse_number<std::size_t>(key, value);
  } else if (key == "participation" || key == "R") {
    c.participation = parse_number<double>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_number<double>(key, value);
  } else if (key == "server_learning_rate") {
    c.server_learning_rate = parse_number<double>(key, value);
  } else if (key == "prox_mu") {
    c.prox_mu = parse_number<double>(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "threshold") {
    c.threshold = parse_number<double>(key, value);
  } else if (key == "repeats") {
    c.repeats = parse_number<std::size_t>(key, value);
  } else if (key == "window") {
    c.window = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "pairing") {
    c.pairing = parse_pairing(value);
  } else if (key == "results_dir") {
    c.results_dir = std::string(value);
  } else {
    throw Error(ErrorKind::ParseError, "unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::size_t lineno = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ParseError, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_override(config, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig config = parse_config(buf.str());
  if (!config.manifest.empty() && config.manifest.is_relative()) {
    config.manifest = path.parent_path() / config.manifest;
  }
  return config;
}

std::string render_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "manifest = " << c.manifest.generic_string() << '\n'
      << "schema = " << c.schema << '\n'
      << "label_column = " << c.label_column << '\n'
      << "distillation_project = " << c.distillation_project << '\n'
      << "test_project = " << c.test_project << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "algorithm = " << to_string(c.algorithm) << '\n'
      << "use_correlation_factors = " << (c.use_correlation_factors ? "true" : "false") << '\n'
      << "local_epochs = " << c.local_epochs << '\n'
      << "rounds = " << c.rounds << '\n'
      << "distill_steps = " << c.distill_steps << '\n'
      << "sample_size = " << c.sample_size << '\n'
      << "participation = " << format_double(c.participation) << '\n'
      << "learning_rate = " << format_double(c.learning_rate) << '\n'
      << "server_learning_rate = " << format_double(c.server_learning_rate) << '\n'
      << "prox_mu = " << format_double(c.prox_mu) << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "threshold = " << format_double(c.threshold) << '\n'
      << "repeats = " << c.repeats << '\n'
      << "window = " << c.window << '\n'
      << "seed = " << c.seed << '\n'
      << "pairing = " << to_string(c.pairing) << '\n'
      << "results_dir = " << c.results_dir.generic_string() << '\n';
  return out.str();
}

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv(kResultsDirEnv); dir != nullptr && *dir != '\0') {
    config.results_dir = dir;
  }
}

}  // namespace feddp
