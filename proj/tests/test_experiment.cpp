// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>

#include "feddp/experiment.hpp"
#include "feddp/report.hpp"
#include "feddp/synthetic.hpp"
#include "support.hpp"

using namespace feddp;

namespace {

std::vector<ProjectDataset> toy_corpus(std::uint64_t seed = 1) {
  const std::vector<VersionLayout> layout{
      {"alpha", "1", 60, 25.0}, {"alpha", "2", 70, 30.0}, {"beta", "1", 80, 20.0},
      {"gamma", "1", 50, 40.0}, {"delta", "1", 90, 15.0}, {"open", "1", 120, 20.0},
  };
  return generate_corpus(layout, {"f0", "f1", "f2", "f3"}, seed);
}

ExperimentConfig toy_config() {
  ExperimentConfig c;
  c.distillation_project = "open";
  c.test_project = "alpha";
  c.schema = "auto";
  c.local_epochs = 2;
  c.rounds = 6;
  c.distill_steps = 3;
  c.sample_size = 50;
  c.learning_rate = 0.05;
  c.server_learning_rate = 0.05;
  c.repeats = 3;
  c.window = 3;
  return c;
}

std::vector<ProjectDataset> promise_corpus() {
  return generate_corpus(promise_layout(), ColumnSchema::promise().features, 3);
}

std::vector<ProjectDataset> softlab_corpus() {
  return generate_corpus(softlab_layout(), ColumnSchema::softlab().features, 3);
}

// A report whose every round has the given F1 (other metrics follow F1).
ExperimentReport fake_report(const std::string& method, const std::string& project, std::vector<double> f1,
                             std::size_t rounds = 4) {
  ExperimentReport r;
  r.method = method;
  r.test_project = project;
  r.config.rounds = rounds;
  r.config.window = 2;
  r.config.repeats = f1.size();
  for (double v : f1) {
    RepeatResult rep;
    for (std::size_t t = 1; t <= rounds; ++t) {
      RoundRecord rec;
      rec.round = t;
      rec.metrics = MetricsReport{v, v, v, v};
      rep.rounds.push_back(rec);
    }
    rep.metrics = MetricsReport{v, v, v, v};
    r.repeats.push_back(std::move(rep));
  }
  summarize(r);
  return r;
}

std::set<std::string> client_projects(const Scenario& s) {
  std::set<std::string> out;
  for (const auto& c : s.clients) out.insert(c.project());
  return out;
}

void expect_same_trajectory(const ExperimentReport& a, const ExperimentReport& b) {
  ASSERT_EQ(a.repeats.size(), b.repeats.size());
  for (std::size_t r = 0; r < a.repeats.size(); ++r) {
    EXPECT_EQ(a.repeats[r].metrics, b.repeats[r].metrics);
    ASSERT_EQ(a.repeats[r].rounds.size(), b.repeats[r].rounds.size());
    for (std::size_t t = 0; t < a.repeats[r].rounds.size(); ++t) {
      EXPECT_EQ(a.repeats[r].rounds[t].checksum, b.repeats[r].rounds[t].checksum);
      EXPECT_EQ(a.repeats[r].rounds[t].metrics, b.repeats[r].rounds[t].metrics);
    }
  }
  EXPECT_EQ(a.mean, b.mean);
}

}  // namespace

// --- configuration ------------------------------------------------------------

TEST(Config, DefaultsMatchPublishedSetup) {
  const ExperimentConfig c;
  EXPECT_EQ(c.local_epochs, 10u);
  EXPECT_EQ(c.rounds, 50u);
  EXPECT_EQ(c.distill_steps, 10u);
  EXPECT_EQ(c.sample_size, 700u);
  EXPECT_EQ(c.participation, 1.0);
  EXPECT_EQ(c.learning_rate, 0.001);
  EXPECT_EQ(c.repeats, 5u);
  EXPECT_EQ(c.window, 10u);
}

TEST(Config, ParseWithCommentsAndAliases) {
  const auto c = parse_config(
      "# experiment\n"
      "manifest = data/m.csv\n"
      "mode = OpenFLR   # baseline\n"
      "algorithm = fedavg\n"
      "E = 3\nT=7\nN = 2\np = 100\nR = 0.5\n"
      "use_correlation_factors = false\n");
  EXPECT_EQ(c.manifest, "data/m.csv");
  EXPECT_EQ(c.mode, Mode::OpenFLR);
  EXPECT_EQ(c.algorithm, Algorithm::FedAvg);
  EXPECT_EQ(c.local_epochs, 3u);
  EXPECT_EQ(c.rounds, 7u);
  EXPECT_EQ(c.distill_steps, 2u);
  EXPECT_EQ(c.sample_size, 100u);
  EXPECT_EQ(c.participation, 0.5);
  EXPECT_FALSE(c.use_correlation_factors);
  EXPECT_EQ(c.round_config().prox_mu, 0.0);
}

TEST(Config, RenderParseRoundTrip) {
  ExperimentConfig c = toy_config();
  c.manifest = "x/y.csv";
  c.learning_rate = 0.1 + 0.2;
  c.seed = 18446744073709551557ull;
  c.pairing = PairingUnit::Rounds;
  EXPECT_EQ(parse_config(render_config(c)), c);
}

TEST(Config, Errors) {
  EXPECT_FEDDP_ERROR(parse_config("colour = blue\n"), ErrorKind::ParseError);
  EXPECT_FEDDP_ERROR(parse_config("rounds = many\n"), ErrorKind::ParseError);
  EXPECT_FEDDP_ERROR(parse_config("no equals sign\n"), ErrorKind::ParseError);
  EXPECT_FEDDP_ERROR(parse_config("mode = Gossip\n"), ErrorKind::InvalidArgument);
  auto c = toy_config();
  c.participation = 0.0;
  EXPECT_FEDDP_ERROR(c.validate(), ErrorKind::InvalidArgument);
  c = toy_config();
  c.schema = "xml";
  EXPECT_FEDDP_ERROR(c.validate(), ErrorKind::InvalidArgument);
  EXPECT_FEDDP_ERROR(load_config("/nonexistent/feddp.cfg"), ErrorKind::IoError);
}

TEST(Config, LoadResolvesManifestAndEnvironmentOverridesResults) {
  support::TempDir dir;
  {
    std::ofstream out(dir.path() / "exp.cfg");
    out << "manifest = promise/manifest.csv\nresults_dir = here\n";
  }
  auto c = load_config(dir.path() / "exp.cfg");
  EXPECT_EQ(c.manifest, dir.path() / "promise/manifest.csv");
  ::setenv(kResultsDirEnv, "/tmp/elsewhere", 1);
  apply_environment(c);
  ::unsetenv(kResultsDirEnv);
  EXPECT_EQ(c.results_dir, "/tmp/elsewhere");
}

TEST(Config, MethodLabels) {
  ExperimentConfig c;
  EXPECT_EQ(c.method_label(), "FedDP-FedProx");
  c.use_correlation_factors = false;
  EXPECT_EQ(c.method_label(), "FedDP-FedProx-nofactor");
  c.mode = Mode::FLR;
  c.algorithm = Algorithm::FedAvg;
  EXPECT_EQ(c.method_label(), "FLR-FedAvg");
  c.mode = Mode::Centralized;
  EXPECT_EQ(c.method_label(), "Centralized");
}

// --- scenarios -------------------------------------------------------------------

TEST(BuildScenario, PromiseAntWithCamel) {
  ExperimentConfig c;
  c.test_project = "ant";
  const auto corpus = promise_corpus();
  const auto s = build_scenario(c, corpus, 1);
  EXPECT_EQ(s.clients.size(), 21u);
  EXPECT_EQ(s.test.project(), "ant");
  EXPECT_EQ(s.test.version(), "1.7");
  EXPECT_EQ(s.test.size(), 745u);
  EXPECT_EQ(s.distillation.size(), 872u + 965u);
  EXPECT_EQ(s.distillation.defect_count(), 145u + 188u);
  for (const auto& client : s.clients) {
    EXPECT_EQ(2 * client.defect_count(), client.size()) << client.label();
  }
  const auto raw_distill = concat({corpus[2], corpus[3]}, "camel");
  const auto stats = compute_norm_stats(raw_distill);
  EXPECT_EQ(s.stats.min, stats.min);
  EXPECT_EQ(s.stats.max, stats.max);
  EXPECT_EQ(s.test, normalize(corpus[1], stats));
}

TEST(BuildScenario, SoftlabAr6WithAr1) {
  ExperimentConfig c;
  c.schema = "softlab";
  c.distillation_project = "ar1";
  c.test_project = "ar6";
  const auto s = build_scenario(c, softlab_corpus(), 1);
  std::vector<std::string> names;
  for (const auto& client : s.clients) names.push_back(client.project());
  EXPECT_EQ(names, (std::vector<std::string>{"ar3", "ar4", "ar5"}));
}

TEST(BuildScenario, SingleVersionTestProject) {
  ExperimentConfig c;
  c.test_project = "prop6";
  const auto s = build_scenario(c, promise_corpus(), 1);
  EXPECT_EQ(s.test.project(), "prop6");
  EXPECT_EQ(client_projects(s).count("prop6"), 0u);
  EXPECT_EQ(s.clients.size(), 22u);
}

TEST(BuildScenario, Errors) {
  const auto corpus = promise_corpus();
  ExperimentConfig c;
  c.test_project = "hadoop";
  EXPECT_FEDDP_ERROR(build_scenario(c, corpus, 1), ErrorKind::UnknownProject);
  c.test_project = "ant";
  c.distillation_project = "nowhere";
  EXPECT_FEDDP_ERROR(build_scenario(c, corpus, 1), ErrorKind::UnknownProject);
  c.distillation_project = "ant";
  EXPECT_FEDDP_ERROR(build_scenario(c, corpus, 1), ErrorKind::TestEqualsDistillation);
}

TEST(BuildScenario, PropertyExclusionForEveryPairing) {
  for (const auto& corpus : {promise_corpus(), softlab_corpus()}) {
    const auto projects = project_names(corpus);
    for (const auto& distill : projects) {
      for (const auto& test : projects) {
        if (test == distill) continue;
        ExperimentConfig c;
        c.distillation_project = distill;
        c.test_project = test;
        const auto s = build_scenario(c, corpus, 5);
        const auto names = client_projects(s);
        EXPECT_EQ(names.count(test), 0u);
        EXPECT_EQ(names.count(distill), 0u);
        EXPECT_EQ(names.size(), projects.size() - 2);
      }
    }
  }
}

TEST(BuildScenario, OversamplingFollowsTheSeed) {
  ExperimentConfig c;
  c.test_project = "ant";
  const auto corpus = promise_corpus();
  EXPECT_EQ(build_scenario(c, corpus, 9).clients, build_scenario(c, corpus, 9).clients);
  EXPECT_NE(build_scenario(c, corpus, 9).clients, build_scenario(c, corpus, 10).clients);
}

TEST(TestProjects, AllButDistillation) {
  ExperimentConfig c;
  c.test_project = "*";
  const auto names = test_projects(c, promise_corpus());
  EXPECT_EQ(names.size(), 13u);
  EXPECT_EQ(std::count(names.begin(), names.end(), "camel"), 0);
}

// --- runs ---------------------------------------------------------------------------

TEST(RunExperiment, DeterministicDownToTheBytes) {
  const auto corpus = toy_corpus();
  const auto a = run_experiment(toy_config(), corpus);
  const auto b = run_experiment(toy_config(), corpus);
  EXPECT_EQ(a, b);
  EXPECT_EQ(report_to_json(a), report_to_json(b));
}

TEST(RunExperiment, ShapeAndWindowAverage) {
  std::size_t observed = 0;
  const auto r = run_experiment(toy_config(), toy_corpus(), [&](std::size_t, const RoundRecord&) { ++observed; });
  EXPECT_EQ(observed, 18u);
  EXPECT_EQ(r.method, "FedDP-FedProx");
  EXPECT_EQ(r.test_project, "alpha");
  EXPECT_EQ(r.test_version, "2");
  ASSERT_EQ(r.repeats.size(), 3u);
  std::set<std::uint64_t> seeds;
  for (const auto& rep : r.repeats) {
    seeds.insert(rep.seed);
    ASSERT_EQ(rep.rounds.size(), 6u);
    double f1 = 0.0;
    for (std::size_t t = 3; t < 6; ++t) f1 += rep.rounds[t].metrics->f1;
    EXPECT_NEAR(rep.metrics.f1, f1 / 3.0, 1e-15);
  }
  EXPECT_EQ(seeds.size(), 3u);
}

TEST(RunExperiment, PropertyMeanIsArithmeticMeanOfRepeats) {
  const auto r = run_experiment(toy_config(), toy_corpus(2));
  for (Metric m : {Metric::Precision, Metric::Recall, Metric::F1, Metric::AUC}) {
    const auto v = r.repeat_values(m);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    EXPECT_NEAR(metric_value(*r.mean, m), mean, 1e-12);
    EXPECT_NEAR(metric_value(*r.stddev, m), std::sqrt(sq / static_cast<double>(v.size() - 1)), 1e-12);
  }
}

TEST(RunExperiment, FedDpWithoutDistillationEqualsFlr) {
  const auto corpus = toy_corpus(3);
  auto feddp = toy_config();
  feddp.distill_steps = 0;
  auto flr = toy_config();
  flr.mode = Mode::FLR;
  expect_same_trajectory(run_experiment(feddp, corpus), run_experiment(flr, corpus));
}

TEST(RunExperiment, OpenFlrWithZeroServerRateEqualsFlr) {
  const auto corpus = toy_corpus(4);
  auto open = toy_config();
  open.mode = Mode::OpenFLR;
  open.server_learning_rate = 0.0;
  auto flr = toy_config();
  flr.mode = Mode::FLR;
  expect_same_trajectory(run_experiment(open, corpus), run_experiment(flr, corpus));
}

TEST(RunExperiment, CentralizedTrainsOnePooledModel) {
  auto c = toy_config();
  c.mode = Mode::Centralized;
  const auto r = run_experiment(c, toy_corpus());
  EXPECT_EQ(r.method, "Centralized");
  for (const auto& rep : r.repeats) {
    ASSERT_EQ(rep.rounds.size(), 6u);
    for (const auto& rec : rep.rounds) {
      EXPECT_EQ(rec.mode, Mode::Centralized);
      EXPECT_TRUE(rec.participants.empty());
      EXPECT_TRUE(rec.metrics.has_value());
    }
  }
}

TEST(RunExperiment, AllProjects) {
  auto c = toy_config();
  c.test_project = "";
  c.repeats = 1;
  c.rounds = 2;
  const auto reports = run_all_projects(c, toy_corpus());
  std::vector<std::string> keys;
  for (const auto& [k, _] : reports) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"alpha", "beta", "delta", "gamma"}));
}

// --- comparisons -------------------------------------------------------------------------

TEST(CompareMethods, SelfComparisonIsADegenerateTie) {
  const auto r = run_experiment(toy_config(), toy_corpus());
  auto copy = r;
  copy.method = "twin";
  const auto cells = compare_methods({{r.method, r}, {"twin", copy}}, r.method, Metric::F1, PairingUnit::Repeats);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].test.p_value, 1.0);
  EXPECT_TRUE(cells[0].test.degenerate);
  EXPECT_EQ(cells[0].verdict.verdict, Verdict::Tie);
}

TEST(CompareMethods, SeparatedFiveRepeatsFloorAtOneSixteenth) {
  const auto ours = fake_report("ours", "ant", {0.60, 0.61, 0.62, 0.63, 0.64});
  const auto base = fake_report("base", "ant", {0.40, 0.41, 0.42, 0.43, 0.44});
  const auto cells = compare_methods({{"ours", ours}, {"base", base}}, "ours", Metric::F1, PairingUnit::Repeats);
  EXPECT_EQ(cells[0].test.p_value, 0.0625);
  EXPECT_EQ(cells[0].verdict.verdict, Verdict::Tie);
  // Pairing every in-window round gives 10 pairs and a decisive result.
  const auto rounds = compare_methods({{"ours", ours}, {"base", base}}, "ours", Metric::F1, PairingUnit::Rounds);
  EXPECT_LT(rounds[0].test.p_value, 0.05);
  EXPECT_EQ(rounds[0].verdict.verdict, Verdict::Win);
}

TEST(CompareMethods, Mismatches) {
  const auto ours = fake_report("ours", "ant", {0.6, 0.7, 0.8});
  EXPECT_FEDDP_ERROR(compare_methods({{"ours", ours}, {"b", fake_report("b", "ant", {0.1, 0.2})}}, "ours",
                                     Metric::F1, PairingUnit::Repeats),
                     ErrorKind::RepeatMismatch);
  EXPECT_FEDDP_ERROR(compare_methods({{"ours", ours}, {"b", fake_report("b", "poi", {0.1, 0.2, 0.3})}}, "ours",
                                     Metric::F1, PairingUnit::Repeats),
                     ErrorKind::RepeatMismatch);
  EXPECT_FEDDP_ERROR(compare_methods({{"b", ours}}, "ours", Metric::F1, PairingUnit::Repeats),
                     ErrorKind::InvalidArgument);
}

TEST(SignificanceTableTest, TalliesPartitionProjects) {
  std::map<std::string, std::map<std::string, ExperimentReport>> by_method;
  const std::vector<std::string> projects{"ant", "poi", "ivy", "xalan"};
  Rng rng(3);
  for (const auto& p : projects) {
    for (const std::string method : {"FedDP-FedProx", "FLR-FedProx", "OpenFLR-FedProx"}) {
      std::vector<double> f1;
      for (int r = 0; r < 8; ++r) f1.push_back(rng.uniform01());
      by_method[method][p] = fake_report(method, p, f1);
    }
  }
  const auto table = build_significance_table(by_method, "FedDP-FedProx", Metric::F1, PairingUnit::Repeats);
  EXPECT_EQ(table.baselines.size(), 2u);
  for (const auto& [baseline, t] : table.tallies) {
    EXPECT_EQ(t.win + t.tie + t.loss, projects.size()) << baseline;
  }
  const auto text = table.render();
  EXPECT_NE(text.find("Avg. & W/T/L"), std::string::npos);
  EXPECT_NE(text.find("p vs FLR-FedProx"), std::string::npos);
}

TEST(CommunicationEfficiency, FractionalMeansAndCensoring) {
  auto fast = fake_report("fast", "ant", {0.0, 0.0});
  auto slow = fake_report("slow", "ant", {0.0, 0.0});
  const std::vector<std::vector<double>> fast_series{{0.5, 0.6, 0.6, 0.6}, {0.5, 0.5, 0.6, 0.6}};
  const std::vector<std::vector<double>> slow_series{{0.5, 0.5, 0.5, 0.6}, {0.5, 0.5, 0.5, 0.5}};
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t t = 0; t < 4; ++t) {
      fast.repeats[r].rounds[t].metrics->f1 = fast_series[r][t];
      slow.repeats[r].rounds[t].metrics->f1 = slow_series[r][t];
    }
  }
  const auto rows = communication_efficiency({{"fast", fast}, {"slow", slow}}, {0.525, 0.55});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].project, "ant");
  EXPECT_EQ(rows[0].rounds.at("fast").render(), "2.5");
  EXPECT_EQ(rows[0].rounds.at("slow").render(), ">4");
  const auto text = render_efficiency(rows);
  EXPECT_NE(text.find("52.5%"), std::string::npos);
  EXPECT_NE(text.find("55.0%"), std::string::npos);
}

TEST(Ablation, ThreeVariants) {
  const auto v = ablation_variants(ExperimentConfig{});
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].method_label(), "FedDP-FedProx");
  EXPECT_EQ(v[1].method_label(), "FedDP-FedProx-nofactor");
  EXPECT_EQ(v[2].method_label(), "FLR-FedProx");
}

TEST(Formatting, PercentWithTwoDecimals) {
  EXPECT_EQ(format_percent(0.491372), "49.14");
  EXPECT_EQ(format_percent(0.6818), "68.18");
  EXPECT_EQ(format_percent(1.0), "100.00");
  EXPECT_EQ(format_percent(std::nan("")), "n/a");
  EXPECT_EQ(parse_metric("F1"), Metric::F1);
  EXPECT_EQ(parse_metric("auc"), Metric::AUC);
  EXPECT_FEDDP_ERROR(parse_metric("mcc"), ErrorKind::InvalidArgument);
}
