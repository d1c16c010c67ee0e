#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "snvrg/bench.hpp"

using namespace snvrg;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

json base_config() {
  return json::parse(R"({
    "problem": {"family": "pl-quadratic", "n": 128, "d": 5, "seed": 3},
    "algorithms": [{"name": "snvrg"}, {"name": "svrg"}],
    "epsilon": 1e-2,
    "seeds": [1, 2],
    "eval_budget": 200000
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("snvrg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(BENCH_EXE) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Config, ParsesValidDocument) {
  json doc = base_config();
  doc["algorithms"][0]["mode"] = "paper";
  doc["algorithms"][1]["hyperparameters"] = {{"eta", 0.01}};
  doc["log_every"] = 4;
  doc["output_dir"] = "somewhere";
  const ExperimentConfig c = parse_experiment_config(doc);
  EXPECT_EQ(c.problem.family, "pl-quadratic");
  EXPECT_EQ(c.problem.n, 128u);
  EXPECT_EQ(c.algorithms.size(), 2u);
  EXPECT_EQ(c.algorithms[0].mode, "paper");
  EXPECT_EQ(c.algorithms[1].label, "svrg");
  EXPECT_DOUBLE_EQ(c.algorithms[1].hyperparameters["eta"].get<double>(), 0.01);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(c.log_every, 4u);
  EXPECT_EQ(c.output_dir, fs::path("somewhere"));
}

TEST(Config, RejectsSchemaViolations) {
  auto expect_bad = [](const std::function<void(json&)>& mutate) {
    json doc = base_config();
    mutate(doc);
    EXPECT_THROW(parse_experiment_config(doc), ConfigError) << doc.dump();
  };
  expect_bad([](json& d) { d["algorithms"][0]["name"] = "adam"; });
  expect_bad([](json& d) { d["seeds"] = json::array(); });
  expect_bad([](json& d) { d.erase("seeds"); });
  expect_bad([](json& d) { d["epsilon"] = 0.0; });
  expect_bad([](json& d) { d["eval_budget"] = 0; });
  expect_bad([](json& d) { d["problem"]["family"] = "ridge"; });
  expect_bad([](json& d) { d["problem"]["n"] = 2; });
  expect_bad([](json& d) { d["algorithms"][1]["name"] = "snvrg"; });
  expect_bad([](json& d) { d["algorithms"][0]["mode"] = "fast"; });
  expect_bad([](json& d) { d["algorithms"] = json::array(); });
  expect_bad([](json& d) {
    d["problem"]["family"] = "nonconvex-logistic";
    d["algorithms"][0]["name"] = "snvrg-pl";
  });
  expect_bad([](json& d) { d["seeds"] = "1"; });
}

TEST(Config, SeedOverride) {
  ExperimentConfig c = parse_experiment_config(base_config());
  apply_seed_override(c, nullptr);
  EXPECT_EQ(c.seeds.size(), 2u);
  apply_seed_override(c, "7");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{7}));
  apply_seed_override(c, "3,4,5");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_THROW(apply_seed_override(c, "x"), ConfigError);
  EXPECT_THROW(apply_seed_override(c, "1,,2"), ConfigError);
}

TEST(Config, LoadFromFile) {
  const fs::path dir = scratch("load");
  std::ofstream(dir / "ok.json") << base_config().dump();
  EXPECT_EQ(load_experiment_config(dir / "ok.json").seeds.size(), 2u);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_experiment_config(dir / "bad.json"), ConfigError);
  EXPECT_THROW(load_experiment_config(dir / "missing.json"), ConfigError);
}

TEST(RunSingle, SnvrgAndSvrgReachTargetOnQuadratic) {
  json doc = base_config();
  doc["problem"] = {{"family", "pl-quadratic"}, {"n", 1024}, {"d", 20}, {"seed", 1}};
  doc["epsilon"] = 1e-3;
  doc["eval_budget"] = 5000000;
  const ExperimentConfig c = parse_experiment_config(doc);
  for (const auto& alg : c.algorithms) {
    const RunOutcome o = run_single(c, alg, 1);
    EXPECT_EQ(o.status, RunStatus::kConverged) << alg.name << " " << o.message;
    ASSERT_TRUE(o.evals_to_target.has_value()) << alg.name;
    EXPECT_LE(*o.evals_to_target, o.record.total_evals);
    EXPECT_LE(o.record.trajectory.back().grad_norm_sq, 1e-6);
  }
}

TEST(RunSingle, PlTargetUsesSuboptimality) {
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "snvrg-pl"}}});
  doc["epsilon"] = 1e-4;
  const ExperimentConfig c = parse_experiment_config(doc);
  const RunOutcome o = run_single(c, c.algorithms[0], 1);
  ASSERT_EQ(o.status, RunStatus::kConverged) << o.message;
  auto p = make_problem(c.problem);
  bool found = false;
  for (const auto& pt : o.record.trajectory) {
    if (pt.evals == *o.evals_to_target) {
      EXPECT_LE(pt.f_value - *p->optimum_value(), 1e-4);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(RunSingle, EveryEpochHasAComplexityTriple) {
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "snvrg"}, {"hyperparameters", {{"epochs", 7}, {"stop_at_target", false}}}}});
  const ExperimentConfig c = parse_experiment_config(doc);
  const RunOutcome o = run_single(c, c.algorithms[0], 1);
  ASSERT_EQ(o.epoch_reports.size(), 7u);
  const json j = outcome_to_json(o);
  ASSERT_EQ(j["complexity"].size(), 7u);
  std::uint64_t sum = 0;
  for (const auto& e : j["complexity"]) {
    EXPECT_TRUE(e.contains("measured"));
    EXPECT_TRUE(e.contains("formula_count"));
    EXPECT_TRUE(e.contains("count_bound"));
    sum += e["measured"].get<std::uint64_t>();
  }
  EXPECT_EQ(sum, o.record.total_evals);
}

TEST(RunSingle, PaperModeDerivesPlugInParameters) {
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "snvrg"}, {"mode", "paper"}}, {{"name", "snvrg-pl"}, {"mode", "paper"}}});
  doc["eval_budget"] = 20000;
  const ExperimentConfig c = parse_experiment_config(doc);
  auto p = make_problem(c.problem);
  const Vector z0 = default_start_point(c.problem);
  EvalCounter counter;
  GradientOracle oracle(*p, counter);
  const double sigma = oracle.variance_at(z0);

  const RunOutcome a = run_single(c, c.algorithms[0], 1);
  const StationaryParams sp = stationary_params_for(*p, z0, c.epsilon, sigma, 0.0);
  EXPECT_EQ(a.derived["B"].get<std::uint64_t>(), sp.base_batch);
  EXPECT_EQ(a.derived["S"].get<std::uint64_t>(), sp.epochs);
  EXPECT_DOUBLE_EQ(a.derived["M"].get<double>(), 6.0 * p->smoothness_bound());

  const RunOutcome b = run_single(c, c.algorithms[1], 1);
  const DominatedParams dp = dominated_params_for(*p, z0, c.epsilon, sigma, 0.0);
  EXPECT_EQ(b.derived["U"].get<std::uint64_t>(), dp.stages);
  EXPECT_EQ(b.derived["S"].get<std::uint64_t>(), dp.epochs);
}

TEST(RunSingle, DivergenceIsRecordedNotThrown) {
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "gd"}, {"hyperparameters", {{"eta", 1e200}}}}});
  const ExperimentConfig c = parse_experiment_config(doc);
  const RunOutcome o = run_single(c, c.algorithms[0], 1);
  EXPECT_EQ(o.status, RunStatus::kDiverged);
  EXPECT_FALSE(o.message.empty());
}

TEST(RunSingle, BudgetExhaustionIsFlagged) {
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "sgd"}}});
  doc["epsilon"] = 1e-8;
  doc["eval_budget"] = 500;
  const ExperimentConfig c = parse_experiment_config(doc);
  const RunOutcome o = run_single(c, c.algorithms[0], 1);
  EXPECT_EQ(o.status, RunStatus::kBudgetExhausted);
  EXPECT_TRUE(o.record.budget_exhausted);
}

TEST(RunExperiment, WritesLayoutAndIsDeterministic) {
  const fs::path dir = scratch("layout");
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "snvrg"}}, {{"name", "scsg"}, {"label", "scsg-small"}},
                                   {{"name", "gd"}}, {{"name", "sgd"}}});
  doc["output_dir"] = (dir / "a").string();
  ExperimentConfig c = parse_experiment_config(doc);
  const ExperimentSummary first = run_experiment(c, 1);
  c.output_dir = dir / "b";
  const ExperimentSummary second = run_experiment(c, 3);
  EXPECT_TRUE(first.all_ok());
  ASSERT_EQ(first.runs.size(), 8u);
  for (const std::string label : {"snvrg", "scsg-small", "gd", "sgd"}) {
    for (const std::string seed : {"1", "2"}) {
      const fs::path a = dir / "a" / label / seed / "trajectory.csv";
      const fs::path b = dir / "b" / label / seed / "trajectory.csv";
      ASSERT_TRUE(fs::exists(a)) << a;
      ASSERT_TRUE(fs::exists(dir / "a" / label / seed / "summary.json"));
      EXPECT_EQ(slurp(a), slurp(b)) << label << "/" << seed;
      std::ifstream in(a);
      std::string line;
      std::getline(in, line);
      EXPECT_EQ(line, "evals,iter,f_value,grad_norm_sq");
      long long prev = -1;
      while (std::getline(in, line)) {
        const long long evals = std::stoll(line.substr(0, line.find(',')));
        EXPECT_GT(evals, prev);
        prev = evals;
      }
    }
  }
  const json top = json::parse(slurp(dir / "a" / "summary.json"));
  EXPECT_EQ(top["runs"].size(), 8u);
  EXPECT_TRUE(top["all_ok"].get<bool>());
}

TEST(RunExperiment, ProbesExemptFromCensus) {
  json doc = base_config();
  doc["algorithms"] = json::array({{{"name", "snvrg"}, {"hyperparameters", {{"epochs", 5}, {"stop_at_target", false}}}}});
  doc["log_every"] = 1;
  const ExperimentConfig c = parse_experiment_config(doc);
  const RunOutcome o = run_single(c, c.algorithms[0], 4);
  std::uint64_t census = 0;
  for (const auto& r : o.epoch_reports) census += r.measured;
  EXPECT_EQ(census, o.record.total_evals);
  EXPECT_GT(o.record.trajectory.size(), 6u);
}

TEST(Curves, SinglePointHasFiveRows) {
  const fs::path dir = scratch("curves1");
  const auto rows = emit_curves({1e4}, {1e-2}, dir / "c.csv");
  EXPECT_EQ(rows.size(), 5u);
  EXPECT_EQ(read_curves_csv(dir / "c.csv").size(), 5u);
}

TEST(Curves, GridRoundTripsAndDominates) {
  const fs::path dir = scratch("curves2");
  const auto rows = emit_curves(parse_grid("log:1e2:1e8:20"), parse_grid("log:1e-4:1e-1:20"), dir / "c.csv");
  const auto back = read_curves_csv(dir / "c.csv");
  ASSERT_EQ(rows.size(), 2000u);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].algorithm, rows[i].algorithm);
    EXPECT_EQ(back[i].n, rows[i].n);
    EXPECT_EQ(back[i].epsilon, rows[i].epsilon);
    EXPECT_EQ(back[i].complexity, rows[i].complexity);
  }
  for (std::size_t i = 0; i < rows.size(); i += 5) {
    EXPECT_LE(rows[i + 4].complexity, rows[i + 3].complexity);
  }
}

TEST(Curves, GridParsing) {
  EXPECT_EQ(parse_grid("1,2.5,100"), (std::vector<double>{1.0, 2.5, 100.0}));
  const auto g = parse_grid("log:1e2:1e8:7");
  ASSERT_EQ(g.size(), 7u);
  EXPECT_NEAR(g.front(), 1e2, 1e-9);
  EXPECT_NEAR(g.back(), 1e8, 1e-3);
  EXPECT_NEAR(g[1], 1e3, 1e-9);
  EXPECT_THROW(parse_grid(""), InputError);
  EXPECT_THROW(emit_curves({}, {0.1}, "x.csv"), InputError);
}

TEST(Verify, AllChecksPass) {
  for (const auto& c : run_verification()) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  json doc = base_config();
  doc["output_dir"] = (dir / "out").string();
  std::ofstream(dir / "ok.json") << doc.dump();
  EXPECT_EQ(run_cli("run " + (dir / "ok.json").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.json"));

  json bad = doc;
  bad["algorithms"][0]["name"] = "adam";
  std::ofstream(dir / "bad.json") << bad.dump();
  EXPECT_EQ(run_cli("run " + (dir / "bad.json").string()), 2);
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);

  json diverge = doc;
  diverge["algorithms"] = json::array({{{"name", "gd"}, {"hyperparameters", {{"eta", 1e200}}}}});
  std::ofstream(dir / "div.json") << diverge.dump();
  EXPECT_EQ(run_cli("run " + (dir / "div.json").string()), 1);

  EXPECT_EQ(run_cli("run " + (dir / "ok.json").string() + " --output " + (dir / "alt").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "alt" / "snvrg" / "1" / "trajectory.csv"));
  EXPECT_EQ(run_cli("verify"), 0);
  EXPECT_EQ(run_cli("curves --n-grid 1e3 --eps-grid 1e-2,1e-3 --out " + (dir / "c.csv").string()), 0);
  EXPECT_EQ(read_curves_csv(dir / "c.csv").size(), 10u);
}

TEST(Cli, BenchSeedOverridesConfig) {
  const fs::path dir = scratch("cli_seed");
  json doc = base_config();
  doc["output_dir"] = (dir / "out").string();
  std::ofstream(dir / "c.json") << doc.dump();
  const std::string cmd = "BENCH_SEED=9 " + std::string(BENCH_EXE) + " run " + (dir / "c.json").string() +
                          " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "snvrg" / "9" / "trajectory.csv"));
  EXPECT_FALSE(fs::exists(dir / "out" / "snvrg" / "1"));
}
