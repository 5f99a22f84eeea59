// SPDX-License-Identifier: Apache-2.0

#ifndef FEDDP_REPORT_HPP
#define FEDDP_REPORT_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "feddp/experiment.hpp"

namespace feddp {

/// File names written by emit_report.
inline constexpr const char* kResultFile = "result.json";
inline constexpr const char* kSummaryFile = "summary.txt";
inline constexpr const char* kSeriesFile = "series.csv";
inline constexpr const char* kRoundsFile = "rounds.ndjson";

/// Full-precision JSON document. Absent or non-finite values are written
/// as null so the schema does not depend on the report's contents.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);

/// One round log line (no trailing newline).
std::string round_record_line(std::size_t repeat, const RoundRecord& record);

/// Mean ± std table with two-decimal percentages, then one line per repeat.
std::string render_summary(const ExperimentReport& report);

/// repeat,round,f1,auc with one row per evaluated round.
std::string render_series_csv(const ExperimentReport& report);

/// Writes result.json, summary.txt, series.csv and rounds.ndjson into
/// `dir` (created if missing). Output bytes depend only on the report.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Reads a result.json file, or the one inside a directory.
ExperimentReport parse_report(const std::filesystem::path& path);

}  // namespace feddp

#endif  // FEDDP_REPORT_HPP
