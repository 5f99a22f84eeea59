// SPDX-License-Identifier: Apache-2.0

#include "feddp/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "feddp/error.hpp"

namespace feddp {

namespace {

bool is_all_projects(const std::string& name) { return name.empty() || name == "*"; }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean_of(v);
  double sq = 0.0;
  for (double x : v) {
    sq += (x - m) * (x - m);
  }
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

MetricsReport window_mean(const std::vector<RoundRecord>& rounds, std::size_t window) {
  const std::size_t w = std::min(window, rounds.size());
  MetricsReport m;
  for (std::size_t i = rounds.size() - w; i < rounds.size(); ++i) {
    const auto& r = *rounds[i].metrics;
    m.precision += r.precision;
    m.recall += r.recall;
    m.f1 += r.f1;
    m.auc += r.auc;
  }
  const double inv = 1.0 / static_cast<double>(w);
  return {m.precision * inv, m.recall * inv, m.f1 * inv, m.auc * inv};
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) {
    s.append(width - s.size(), ' ');
  }
  return s;
}

std::string format_p(double p) {
  if (p < kSignificanceLevel) {
    return "<0.05";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

std::string format_std(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", s);
  return buf;
}

}  // namespace

std::vector<std::string> project_names(const std::vector<ProjectDataset>& datasets) {
  std::vector<std::string> names;
  for (const auto& d : datasets) {
    if (std::find(names.begin(), names.end(), d.project()) == names.end()) {
      names.push_back(d.project());
    }
  }
  return names;
}

std::vector<std::string> test_projects(const ExperimentConfig& config, const std::vector<ProjectDataset>& datasets) {
  if (!is_all_projects(config.test_project)) {
    return {config.test_project};
  }
  std::vector<std::string> out;
  for (auto& name : project_names(datasets)) {
    if (name != config.distillation_project) {
      out.push_back(std::move(name));
    }
  }
  return out;
}

Scenario build_scenario(const ExperimentConfig& config, const std::vector<ProjectDataset>& datasets,
                        std::uint64_t oversample_seed) {
  const auto& test_name = config.test_project;
  const auto& distill_name = config.distillation_project;
  if (is_all_projects(test_name)) {
    throw Error(ErrorKind::InvalidArgument, "build_scenario needs a single test project");
  }
  if (test_name == distill_name) {
    throw Error(ErrorKind::TestEqualsDistillation, "test project '" + test_name + "' is also the distillation project");
  }

  const ProjectDataset* test = nullptr;
  std::vector<ProjectDataset> distill_parts;
  std::vector<const ProjectDataset*> client_raw;
  for (const auto& d : datasets) {
    if (d.project() == test_name) {
      test = &d;  // later manifest entries are newer
    } else if (d.project() == distill_name) {
      distill_parts.push_back(d);
    } else {
      client_raw.push_back(&d);
    }
  }
  if (test == nullptr) {
    throw Error(ErrorKind::UnknownProject, "test project '" + test_name + "' is not in the manifest");
  }
  if (distill_parts.empty()) {
    throw Error(ErrorKind::UnknownProject, "distillation project '" + distill_name + "' is not in the manifest");
  }
  if (client_raw.empty()) {
    throw Error(ErrorKind::EmptyInput, "scenario has no client datasets");
  }

  std::string distill_version;
  for (const auto& part : distill_parts) {
    if (!distill_version.empty()) {
      distill_version += '+';
    }
    distill_version += part.version();
  }
  const ProjectDataset distill_raw =
      distill_parts.size() == 1 ? distill_parts.front() : concat(distill_parts, distill_name, distill_version);
  NormStats stats = compute_norm_stats(distill_raw);

  std::vector<ProjectDataset> clients;
  clients.reserve(client_raw.size());
  for (std::size_t c = 0; c < client_raw.size(); ++c) {
    Rng rng(derive_seed(oversample_seed, {stream::kOversample, c}));
    clients.push_back(normalize(oversample(*client_raw[c], rng), stats));
  }
  return Scenario{std::move(clients), normalize(distill_raw, stats), normalize(*test, stats), std::move(stats)};
}

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::Precision: return "precision";
    case Metric::Recall: return "recall";
    case Metric::F1: return "f1";
    case Metric::AUC: return "auc";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : {Metric::Precision, Metric::Recall, Metric::F1, Metric::AUC}) {
    std::string_view name = to_string(m);
    if (name.size() == text.size() &&
        std::equal(name.begin(), name.end(), text.begin(),
                   [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return m;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

double metric_value(const MetricsReport& report, Metric m) noexcept {
  switch (m) {
    case Metric::Precision: return report.precision;
    case Metric::Recall: return report.recall;
    case Metric::F1: return report.f1;
    case Metric::AUC: return report.auc;
  }
  return 0.0;
}

std::vector<double> ExperimentReport::repeat_values(Metric m) const {
  std::vector<double> out;
  for (const auto& r : repeats) {
    out.push_back(metric_value(r.metrics, m));
  }
  return out;
}

std::vector<double> ExperimentReport::window_values(Metric m) const {
  std::vector<double> out;
  for (const auto& r : repeats) {
    const std::size_t w = std::min(config.window, r.rounds.size());
    for (std::size_t i = r.rounds.size() - w; i < r.rounds.size(); ++i) {
      out.push_back(metric_value(*r.rounds[i].metrics, m));
    }
  }
  return out;
}

std::vector<double> ExperimentReport::series(std::size_t repeat, Metric m) const {
  std::vector<double> out;
  for (const auto& rec : repeats.at(repeat).rounds) {
    out.push_back(rec.metrics ? metric_value(*rec.metrics, m) : std::nan(""));
  }
  return out;
}

void summarize(ExperimentReport& report) {
  if (report.repeats.empty()) {
    report.mean.reset();
    report.stddev.reset();
    return;
  }
  MetricsReport mean;
  MetricsReport sd;
  for (Metric m : {Metric::Precision, Metric::Recall, Metric::F1, Metric::AUC}) {
    const auto values = report.repeat_values(m);
    const double mu = mean_of(values);
    const double s = sample_std(values);
    switch (m) {
      case Metric::Precision: mean.precision = mu; sd.precision = s; break;
      case Metric::Recall: mean.recall = mu; sd.recall = s; break;
      case Metric::F1: mean.f1 = mu; sd.f1 = s; break;
      case Metric::AUC: mean.auc = mu; sd.auc = s; break;
    }
  }
  report.mean = mean;
  report.stddev = sd;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const std::vector<ProjectDataset>& datasets,
                                const RoundObserver& observer) {
  config.validate();
  ExperimentReport report;
  report.method = config.method_label();
  report.config = config;

  for (std::size_t r = 0; r < config.repeats; ++r) {
    const std::uint64_t seed = derive_seed(config.seed, {stream::kRepeat, r});
    Scenario scenario = build_scenario(config, datasets, derive_seed(seed, {stream::kOversample}));
    report.test_project = scenario.test.project();
    report.test_version = scenario.test.version();

    RepeatResult result;
    result.seed = seed;
    const std::size_t d = scenario.distillation.dimensionality();

    auto record_round = [&](RoundRecord rec, const ModelParams& global) {
      rec.metrics = evaluate(global, scenario.test, config.threshold);
      if (observer) {
        observer(r, rec);
      }
      result.rounds.push_back(std::move(rec));
    };

    if (config.mode == Mode::Centralized) {
      std::vector<ProjectDataset> parts = scenario.clients;
      parts.push_back(scenario.distillation);
      const ProjectDataset pooled = concat(parts, "pooled");
      TrainSpec spec;
      spec.learning_rate = config.learning_rate;
      spec.epochs = config.local_epochs;
      spec.batch_size = config.batch_size;
      Rng rng(derive_seed(seed, {stream::kCentralized}));
      ModelParams params = ModelParams::zeros(d);
      for (std::size_t t = 1; t <= config.rounds; ++t) {
        params = local_train(params, pooled, spec, rng);
        RoundRecord rec;
        rec.round = t;
        rec.mode = Mode::Centralized;
        rec.checksum = params.checksum();
        record_round(std::move(rec), params);
      }
    } else {
      std::vector<Client> clients;
      clients.reserve(scenario.clients.size());
      for (std::size_t c = 0; c < scenario.clients.size(); ++c) {
        clients.emplace_back(static_cast<ClientId>(c), std::move(scenario.clients[c]));
      }
      Server server(ModelParams::zeros(d), std::move(clients), scenario.distillation, seed);
      const RoundConfig rc = config.round_config();
      for (std::size_t t = 1; t <= config.rounds; ++t) {
        RoundRecord rec = server.run_round(rc);
        record_round(std::move(rec), server.global());
      }
    }
    result.metrics = window_mean(result.rounds, config.window);
    report.repeats.push_back(std::move(result));
  }
  summarize(report);
  return report;
}

std::map<std::string, ExperimentReport> run_all_projects(const ExperimentConfig& config,
                                                         const std::vector<ProjectDataset>& datasets,
                                                         const RoundObserver& observer) {
  std::map<std::string, ExperimentReport> out;
  for (const auto& project : test_projects(config, datasets)) {
    ExperimentConfig single = config;
    single.test_project = project;
    out.emplace(project, run_experiment(single, datasets, observer));
  }
  return out;
}

std::vector<ComparisonCell> compare_methods(const std::map<std::string, ExperimentReport>& reports,
                                            const std::string& ours, Metric metric, PairingUnit pairing) {
  const auto it = reports.find(ours);
  if (it == reports.end()) {
    throw Error(ErrorKind::InvalidArgument, "compare_methods: no report for method '" + ours + "'");
  }
  const ExperimentReport& mine = it->second;
  auto sample = [&](const ExperimentReport& r) {
    return pairing == PairingUnit::Repeats ? r.repeat_values(metric) : r.window_values(metric);
  };
  const auto mine_values = sample(mine);

  std::vector<ComparisonCell> cells;
  for (const auto& [method, other] : reports) {
    if (method == ours) {
      continue;
    }
    if (other.test_project != mine.test_project) {
      throw Error(ErrorKind::RepeatMismatch, "compare_methods: '" + method + "' was run on a different test project");
    }
    const auto other_values = sample(other);
    if (other.repeats.size() != mine.repeats.size() || other_values.size() != mine_values.size()) {
      throw Error(ErrorKind::RepeatMismatch, "compare_methods: '" + method + "' has a different number of repeats");
    }
    ComparisonCell cell;
    cell.project = mine.test_project;
    cell.baseline = method;
    cell.mean_ours = mine.mean ? metric_value(*mine.mean, metric) : 0.0;
    cell.mean_baseline = other.mean ? metric_value(*other.mean, metric) : 0.0;
    try {
      cell.test = wilcoxon_signed_rank(mine_values, other_values);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::AllZeroDifferences) {
        throw;
      }
      cell.test = WilcoxonResult{1.0, 0.0, 0, true, true};
    }
    cell.verdict = win_tie_loss(cell.test.p_value, cell.mean_ours, cell.mean_baseline);
    cells.push_back(std::move(cell));
  }
  return cells;
}

SignificanceTable build_significance_table(
    const std::map<std::string, std::map<std::string, ExperimentReport>>& by_method, const std::string& ours,
    Metric metric, PairingUnit pairing) {
  const auto mine = by_method.find(ours);
  if (mine == by_method.end()) {
    throw Error(ErrorKind::InvalidArgument, "significance table: no reports for method '" + ours + "'");
  }
  SignificanceTable table;
  table.metric = metric;
  table.ours = ours;
  for (const auto& [method, _] : by_method) {
    table.methods.push_back(method);
    if (method != ours) {
      table.baselines.push_back(method);
      table.tallies[method] = {};
    }
  }
  for (const auto& [project, _] : mine->second) {
    table.projects.push_back(project);
  }

  std::map<std::string, std::vector<double>> means;
  std::map<std::string, std::vector<double>> stds;
  for (const auto& project : table.projects) {
    std::map<std::string, ExperimentReport> per_project;
    for (const auto& [method, reports] : by_method) {
      const auto r = reports.find(project);
      if (r == reports.end()) {
        throw Error(ErrorKind::RepeatMismatch, "method '" + method + "' has no report for project '" + project + "'");
      }
      per_project.emplace(method, r->second);
      const double mu = r->second.mean ? metric_value(*r->second.mean, metric) : 0.0;
      const double sd = r->second.stddev ? metric_value(*r->second.stddev, metric) : 0.0;
      table.values[project][method] = {mu, sd};
      means[method].push_back(mu);
      stds[method].push_back(sd);
    }
    for (auto& cell : compare_methods(per_project, ours, metric, pairing)) {
      auto& tally = table.tallies[cell.baseline];
      switch (cell.verdict.verdict) {
        case Verdict::Win: ++tally.win; break;
        case Verdict::Tie: ++tally.tie; break;
        case Verdict::Loss: ++tally.loss; break;
      }
      table.cells.push_back(std::move(cell));
    }
  }
  for (const auto& method : table.methods) {
    table.averages[method] = {mean_of(means[method]), mean_of(stds[method])};
  }
  return table;
}

std::string SignificanceTable::render() const {
  constexpr std::size_t kProjectWidth = 14;
  constexpr std::size_t kCellWidth = 16;
  std::ostringstream out;
  out << pad("Project", kProjectWidth);
  for (const auto& m : methods) {
    out << pad(m, kCellWidth);
  }
  for (const auto& b : baselines) {
    out << pad("p vs " + b, kCellWidth);
  }
  out << "  (" << to_string(metric) << ", ours = " << ours << ")\n";

  for (const auto& project : projects) {
    out << pad(project, kProjectWidth);
    for (const auto& m : methods) {
      const auto& [mu, sd] = values.at(project).at(m);
      out << pad(format_percent(mu) + "±" + format_std(sd), kCellWidth + 1);
    }
    for (const auto& b : baselines) {
      const auto cell = std::find_if(cells.begin(), cells.end(),
                                     [&](const ComparisonCell& c) { return c.project == project && c.baseline == b; });
      out << pad(format_p(cell->test.p_value), kCellWidth);
    }
    out << '\n';
  }
  out << pad("Avg. & W/T/L", kProjectWidth);
  for (const auto& m : methods) {
    const auto& [mu, sd] = averages.at(m);
    out << pad(format_percent(mu) + "±" + format_std(sd), kCellWidth + 1);
  }
  for (const auto& b : baselines) {
    const auto& t = tallies.at(b);
    out << pad(std::to_string(t.win) + "/" + std::to_string(t.tie) + "/" + std::to_string(t.loss), kCellWidth);
  }
  out << '\n';
  return out.str();
}

std::vector<EfficiencyRow> communication_efficiency(const std::map<std::string, ExperimentReport>& reports,
                                                    const std::vector<double>& targets) {
  std::vector<EfficiencyRow> rows;
  for (double target : targets) {
    EfficiencyRow row;
    row.target = target;
    for (const auto& [method, report] : reports) {
      row.project = report.test_project;
      std::vector<RoundsToTarget> per_repeat;
      for (std::size_t r = 0; r < report.repeats.size(); ++r) {
        const auto f1 = report.series(r, Metric::F1);
        per_repeat.push_back(rounds_to_target(f1, target, f1.size()));
      }
      row.rounds.emplace(method, mean_rounds(per_repeat));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_efficiency(const std::vector<EfficiencyRow>& rows) {
  std::ostringstream out;
  if (rows.empty()) {
    return {};
  }
  out << pad("Project", 12) << pad("F1", 8);
  for (const auto& [method, _] : rows.front().rounds) {
    out << pad(method, 18);
  }
  out << '\n';
  for (const auto& row : rows) {
    char target[32];
    std::snprintf(target, sizeof target, "%.1f%%", 100.0 * row.target);
    out << pad(row.project, 12) << pad(target, 8);
    for (const auto& [_, r] : row.rounds) {
      out << pad(r.render(), 18);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<ExperimentConfig> ablation_variants(const ExperimentConfig& base) {
  ExperimentConfig full = base;
  full.mode = Mode::FedDP;
  full.use_correlation_factors = true;
  ExperimentConfig no_factor = full;
  no_factor.use_correlation_factors = false;
  ExperimentConfig plain = full;
  plain.mode = Mode::FLR;
  return {full, no_factor, plain};
}

std::string format_percent(double fraction) {
  if (!std::isfinite(fraction)) {
    return "n/a";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

}  // namespace feddp
