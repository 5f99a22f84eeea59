// SPDX-License-Identifier: Apache-2.0

// feddp: run, sweep, ablate and compare federated defect-prediction
// experiments, or write a synthetic stand-in corpus.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "feddp/config.hpp"
#include "feddp/error.hpp"
#include "feddp/experiment.hpp"
#include "feddp/report.hpp"
#include "feddp/synthetic.hpp"

namespace fs = std::filesystem;
using namespace feddp;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config_path, "Experiment config file (key = value)");
  cmd->add_option("-s,--set", opts.overrides, "Override one config key, e.g. --set rounds=20")->take_all();
}

ExperimentConfig resolve_config(const CommonOptions& opts) {
  ExperimentConfig config = opts.config_path.empty() ? ExperimentConfig{} : load_config(opts.config_path);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument, "override '" + kv + "' is not key=value");
    }
    apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  apply_environment(config);
  if (config.manifest.empty()) {
    throw Error(ErrorKind::InvalidArgument, "no manifest given (config key 'manifest')");
  }
  config.validate();
  return config;
}

double grand_mean(const std::map<std::string, ExperimentReport>& reports, Metric m) {
  double sum = 0.0;
  for (const auto& [_, r] : reports) {
    sum += r.mean ? metric_value(*r.mean, m) : 0.0;
  }
  return reports.empty() ? 0.0 : sum / static_cast<double>(reports.size());
}

// Runs every test project of one config and writes
// <dir>/<method>/<project>/ for each.
std::map<std::string, ExperimentReport> run_and_emit(const ExperimentConfig& config,
                                                     const std::vector<ProjectDataset>& datasets, const fs::path& dir) {
  std::map<std::string, ExperimentReport> reports;
  for (const auto& project : test_projects(config, datasets)) {
    ExperimentConfig single = config;
    single.test_project = project;
    auto report = run_experiment(single, datasets);
    emit_report(report, dir / report.method / project);
    std::cout << report.method << "  " << project << "  F1 " << format_percent(report.mean->f1) << "  AUC "
              << format_percent(report.mean->auc) << std::endl;
    reports.emplace(project, std::move(report));
  }
  return reports;
}

int cmd_run(const CommonOptions& opts) {
  const auto config = resolve_config(opts);
  const auto datasets = load_manifest(config.manifest, config.column_schema());
  const auto reports = run_and_emit(config, datasets, config.results_dir);
  std::cout << "Avg.  F1 " << format_percent(grand_mean(reports, Metric::F1)) << "  AUC "
            << format_percent(grand_mean(reports, Metric::AUC)) << "\n";
  return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& param, const std::vector<std::string>& values) {
  const auto base = resolve_config(opts);
  const auto datasets = load_manifest(base.manifest, base.column_schema());
  std::vector<std::pair<std::string, std::map<std::string, ExperimentReport>>> rows;
  for (const auto& value : values) {
    ExperimentConfig config = base;
    apply_override(config, param, value);
    config.validate();
    rows.emplace_back(value, run_and_emit(config, datasets, base.results_dir / ("sweep-" + param) / value));
  }
  std::cout << "\n" << param << "\tF1\tAUC\n";
  for (const auto& [value, reports] : rows) {
    std::cout << value << '\t' << format_percent(grand_mean(reports, Metric::F1)) << '\t'
              << format_percent(grand_mean(reports, Metric::AUC)) << '\n';
  }
  return 0;
}

int cmd_ablate(const CommonOptions& opts) {
  const auto base = resolve_config(opts);
  const auto datasets = load_manifest(base.manifest, base.column_schema());
  std::vector<std::pair<std::string, std::map<std::string, ExperimentReport>>> rows;
  for (const auto& variant : ablation_variants(base)) {
    rows.emplace_back(variant.method_label(), run_and_emit(variant, datasets, base.results_dir / "ablation"));
  }
  std::cout << "\nvariant\tF1\tAUC\n";
  for (const auto& [label, reports] : rows) {
    std::cout << label << '\t' << format_percent(grand_mean(reports, Metric::F1)) << '\t'
              << format_percent(grand_mean(reports, Metric::AUC)) << '\n';
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& roots, const std::string& ours, const std::string& metric_name,
                const std::string& pairing_name, const std::vector<double>& targets) {
  std::map<std::string, std::map<std::string, ExperimentReport>> by_method;
  for (const auto& root : roots) {
    if (!fs::exists(root)) {
      throw Error(ErrorKind::IoError, "no such directory '" + root + "'");
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
      if (entry.is_regular_file() && entry.path().filename() == kResultFile) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto report = parse_report(file);
      by_method[report.method].insert_or_assign(report.test_project, std::move(report));
    }
  }
  if (by_method.empty()) {
    throw Error(ErrorKind::EmptyInput, "no result.json files found");
  }
  const auto table = build_significance_table(by_method, ours, parse_metric(metric_name), parse_pairing(pairing_name));
  std::cout << table.render();

  if (!targets.empty()) {
    std::vector<EfficiencyRow> rows;
    for (const auto& project : table.projects) {
      std::map<std::string, ExperimentReport> per_method;
      for (const auto& [method, reports] : by_method) {
        per_method.emplace(method, reports.at(project));
      }
      auto part = communication_efficiency(per_method, targets);
      rows.insert(rows.end(), part.begin(), part.end());
    }
    std::cout << '\n' << render_efficiency(rows);
  }
  return 0;
}

int cmd_synth(const std::string& dataset, const std::string& out, std::uint64_t seed) {
  std::vector<VersionLayout> layout;
  ColumnSchema schema;
  if (dataset == "promise") {
    layout = promise_layout();
    schema = ColumnSchema::promise();
  } else if (dataset == "softlab") {
    layout = softlab_layout();
    schema = ColumnSchema::softlab();
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown dataset '" + dataset + "' (promise or softlab)");
  }
  const auto corpus = generate_corpus(layout, schema.features, seed);
  std::cout << write_corpus(corpus, out, schema.label).string() << '\n';
  return 0;
}

void print_error(std::string_view kind, std::string_view message) {
  const nlohmann::json record = {{"error", kind}, {"message", message}};
  std::cerr << record.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated cross-project defect prediction experiments"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "Run one configuration over its test projects");
  add_common(run, run_opts);

  CommonOptions sweep_opts;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Repeat a run for several values of R, N or p");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "Swept key")->required()->check(CLI::IsMember({"R", "N", "p"}));
  sweep->add_option("--values", sweep_values, "Values to try")->required()->delimiter(',');

  CommonOptions ablate_opts;
  auto* ablate = app.add_subcommand("ablate", "Full method vs. no correlation factors vs. no distillation");
  add_common(ablate, ablate_opts);

  std::vector<std::string> compare_roots;
  std::string compare_ours = "FedDP-FedProx";
  std::string compare_metric = "f1";
  std::string compare_pairing = "repeats";
  std::vector<double> compare_targets;
  auto* compare = app.add_subcommand("compare", "Significance table over emitted result directories");
  compare->add_option("dirs", compare_roots, "Directories searched for result.json")->required();
  compare->add_option("--ours", compare_ours, "Method compared against every other method");
  compare->add_option("--metric", compare_metric, "precision, recall, f1 or auc");
  compare->add_option("--pairing", compare_pairing, "repeats or rounds");
  compare->add_option("--targets", compare_targets, "F1 targets for rounds-to-target, e.g. 0.525,0.55")
      ->delimiter(',');

  std::string synth_dataset = "promise";
  std::string synth_out;
  std::uint64_t synth_seed = 42;
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus shaped like the published dataset table");
  synth->add_option("--dataset", synth_dataset, "promise or softlab");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    print_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_param, sweep_values);
    if (*ablate) return cmd_ablate(ablate_opts);
    if (*compare) return cmd_compare(compare_roots, compare_ours, compare_metric, compare_pairing, compare_targets);
    if (*synth) return cmd_synth(synth_dataset, synth_out, synth_seed);
  } catch (const Error& e) {
    print_error(to_string(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 1;
  }
  return 0;
}
