// SPDX-License-Identifier: Apache-2.0

#include "feddp/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "feddp/error.hpp"

namespace feddp {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "feddp-report/1";

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double as_number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

std::optional<double> as_optional_number(const json& j) {
  if (j.is_null()) {
    return std::nullopt;
  }
  return j.get<double>();
}

json metrics_json(const MetricsReport& m) {
  return {{"precision", number(m.precision)}, {"recall", number(m.recall)}, {"f1", number(m.f1)},
          {"auc", number(m.auc)}};
}

MetricsReport metrics_from(const json& j) {
  return {as_number(j.at("precision")), as_number(j.at("recall")), as_number(j.at("f1")), as_number(j.at("auc"))};
}

json optional_metrics(const std::optional<MetricsReport>& m) { return m ? metrics_json(*m) : json(nullptr); }

std::optional<MetricsReport> optional_metrics_from(const json& j) {
  if (j.is_null()) {
    return std::nullopt;
  }
  return metrics_from(j);
}

json record_json(const RoundRecord& r) {
  return {{"round", r.round},
          {"mode", std::string(to_string(r.mode))},
          {"participants", r.participants},
          {"checksum", r.checksum},
          {"kl_before", optional_number(r.kl_before)},
          {"kl_after", optional_number(r.kl_after)},
          {"metrics", optional_metrics(r.metrics)}};
}

RoundRecord record_from(const json& j) {
  RoundRecord r;
  r.round = j.at("round").get<std::size_t>();
  r.mode = parse_mode(j.at("mode").get<std::string>());
  r.participants = j.at("participants").get<std::vector<ClientId>>();
  r.checksum = j.at("checksum").get<std::uint64_t>();
  r.kl_before = as_optional_number(j.at("kl_before"));
  r.kl_after = as_optional_number(j.at("kl_after"));
  r.metrics = optional_metrics_from(j.at("metrics"));
  return r;
}

// The config travels as its key/value text form so both files share one
// parser.
json config_json(const ExperimentConfig& c) {
  json out = json::object();
  std::istringstream lines(render_config(c));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

ExperimentConfig config_from(const json& j) {
  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    apply_override(c, key, value.get<std::string>());
  }
  return c;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  }
  out << text;
  if (!out.flush()) {
    throw Error(ErrorKind::IoError, "write failed for '" + path.string() + "'");
  }
}

std::string shortest(double v) {
  if (!std::isfinite(v)) {
    return "";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string std_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
  json repeats = json::array();
  for (const auto& r : report.repeats) {
    json rounds = json::array();
    for (const auto& rec : r.rounds) {
      rounds.push_back(record_json(rec));
    }
    repeats.push_back({{"seed", r.seed}, {"metrics", metrics_json(r.metrics)}, {"rounds", std::move(rounds)}});
  }
  json significance = json::array();
  for (const auto& s : report.significance) {
    significance.push_back({{"baseline", s.baseline},
                            {"metric", std::string(to_string(s.metric))},
                            {"p_value", number(s.p_value)},
                            {"verdict", std::string(to_string(s.verdict))},
                            {"degenerate", s.degenerate}});
  }
  const json doc = {{"format", kFormat},
                    {"method", report.method},
                    {"test_project", report.test_project},
                    {"test_version", report.test_version},
                    {"repeat_count", report.repeats.size()},
                    {"mean", optional_metrics(report.mean)},
                    {"stddev", optional_metrics(report.stddev)},
                    {"significance", std::move(significance)},
                    {"config", config_json(report.config)},
                    {"repeats", std::move(repeats)}};
  return doc.dump(2) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("report is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kFormat) {
      throw Error(ErrorKind::ParseError, "unsupported report format '" + doc.at("format").get<std::string>() + "'");
    }
    ExperimentReport report;
    report.method = doc.at("method").get<std::string>();
    report.test_project = doc.at("test_project").get<std::string>();
    report.test_version = doc.at("test_version").get<std::string>();
    report.mean = optional_metrics_from(doc.at("mean"));
    report.stddev = optional_metrics_from(doc.at("stddev"));
    for (const auto& s : doc.at("significance")) {
      SignificanceEntry e;
      e.baseline = s.at("baseline").get<std::string>();
      e.metric = parse_metric(s.at("metric").get<std::string>());
      e.p_value = as_number(s.at("p_value"));
      const auto verdict = s.at("verdict").get<std::string>();
      e.verdict = verdict == "Win" ? Verdict::Win : verdict == "Loss" ? Verdict::Loss : Verdict::Tie;
      e.degenerate = s.at("degenerate").get<bool>();
      report.significance.push_back(std::move(e));
    }
    report.config = config_from(doc.at("config"));
    for (const auto& r : doc.at("repeats")) {
      RepeatResult result;
      result.seed = r.at("seed").get<std::uint64_t>();
      result.metrics = metrics_from(r.at("metrics"));
      for (const auto& rec : r.at("rounds")) {
        result.rounds.push_back(record_from(rec));
      }
      report.repeats.push_back(std::move(result));
    }
    if (doc.at("repeat_count").get<std::size_t>() != report.repeats.size()) {
      throw Error(ErrorKind::ParseError, "repeat_count does not match the repeats array");
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("malformed report: ") + e.what());
  }
}

std::string round_record_line(std::size_t repeat, const RoundRecord& record) {
  json line = {{"repeat", repeat}};
  line.update(record_json(record));
  return line.dump();
}

std::string render_summary(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method      " << report.method << '\n'
      << "test        " << report.test_project << ' ' << report.test_version << '\n'
      << "repeats     " << report.repeats.size() << '\n'
      << '\n'
      << "metric      mean     std\n";
  for (Metric m : {Metric::Precision, Metric::Recall, Metric::F1, Metric::AUC}) {
    std::string name(to_string(m));
    name.resize(12, ' ');
    out << name;
    if (report.mean && report.stddev) {
      std::string mean = format_percent(metric_value(*report.mean, m));
      mean.resize(9, ' ');
      out << mean << std_cell(metric_value(*report.stddev, m)) << '\n';
    } else {
      out << "n/a      n/a\n";
    }
  }
  if (!report.repeats.empty()) {
    out << '\n';
  }
  for (std::size_t r = 0; r < report.repeats.size(); ++r) {
    const auto& m = report.repeats[r].metrics;
    out << "repeat " << r << "  P " << format_percent(m.precision) << "  R " << format_percent(m.recall) << "  F1 "
        << format_percent(m.f1) << "  AUC " << format_percent(m.auc) << '\n';
  }
  for (const auto& s : report.significance) {
    char p[32];
    std::snprintf(p, sizeof p, "%.4f", s.p_value);
    out << "vs " << s.baseline << " (" << to_string(s.metric) << ")  p " << p << "  " << to_string(s.verdict)
        << (s.degenerate ? "  degenerate" : "") << '\n';
  }
  return out.str();
}

std::string render_series_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "repeat,round,f1,auc\n";
  for (std::size_t r = 0; r < report.repeats.size(); ++r) {
    for (const auto& rec : report.repeats[r].rounds) {
      if (!rec.metrics) {
        continue;
      }
      out << r << ',' << rec.round << ',' << shortest(rec.metrics->f1) << ',' << shortest(rec.metrics->auc) << '\n';
    }
  }
  return out.str();
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::IoError, "cannot create '" + dir.string() + "': " + ec.message());
  }
  write_file(dir / kResultFile, report_to_json(report));
  write_file(dir / kSummaryFile, render_summary(report));
  write_file(dir / kSeriesFile, render_series_csv(report));
  std::string rounds;
  for (std::size_t r = 0; r < report.repeats.size(); ++r) {
    for (const auto& rec : report.repeats[r].rounds) {
      rounds += round_record_line(r, rec);
      rounds += '\n';
    }
  }
  write_file(dir / kRoundsFile, rounds);
}

ExperimentReport parse_report(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / kResultFile : path;
  return report_from_json(read_file(file));
}

}  // namespace feddp
