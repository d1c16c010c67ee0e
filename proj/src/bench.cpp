#include "snvrg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "snvrg/sampling.hpp"

namespace snvrg {
namespace {

using nlohmann::json;

const std::set<std::string> kAlgorithms = {"snvrg", "snvrg-pl", "gd", "sgd", "svrg", "scsg"};
const std::set<std::string> kFamilies = {"pl-quadratic", "nonconvex-logistic", "scalar-toy"};

template <typename T>
T hp_or(const json& hp, const char* key, T fallback) {
  auto it = hp.find(key);
  if (it == hp.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyperparameter '") + key + "': " + e.what());
  }
}

template <typename T>
T required(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t epochs_for_budget(std::uint64_t budget, std::uint64_t per_epoch) {
  return budget / std::max<std::uint64_t>(1, per_epoch) + 1;
}

}  // namespace

// --- config -------------------------------------------------------------------

ExperimentConfig parse_experiment_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig config;

  const json problem = required<json>(doc, "problem");
  config.problem.family = required<std::string>(problem, "family");
  config.problem.n = required<std::size_t>(problem, "n");
  config.problem.d = required<std::size_t>(problem, "d");
  config.problem.seed = required<std::uint64_t>(problem, "seed");
  config.problem.alpha = hp_or<double>(problem, "alpha", 0.1);
  if (!kFamilies.contains(config.problem.family)) {
    throw ConfigError("unknown problem family '" + config.problem.family + "'");
  }
  if (config.problem.n < 2 || config.problem.d < 1) throw ConfigError("problem needs n >= 2 and d >= 1");
  if (config.problem.family == "pl-quadratic" && config.problem.n < config.problem.d) {
    throw ConfigError("pl-quadratic needs n >= d");
  }

  const json algorithms = required<json>(doc, "algorithms");
  if (!algorithms.is_array() || algorithms.empty()) throw ConfigError("'algorithms' must be a non-empty array");
  std::set<std::string> labels;
  for (const auto& entry : algorithms) {
    AlgorithmConfig alg;
    alg.name = required<std::string>(entry, "name");
    if (!kAlgorithms.contains(alg.name)) throw ConfigError("unknown algorithm '" + alg.name + "'");
    alg.mode = hp_or<std::string>(entry, "mode", "practical");
    if (alg.mode != "paper" && alg.mode != "practical") {
      throw ConfigError("algorithm mode must be 'paper' or 'practical'");
    }
    alg.label = hp_or<std::string>(entry, "label", alg.name);
    if (!labels.insert(alg.label).second) throw ConfigError("duplicate algorithm label '" + alg.label + "'");
    if (entry.contains("hyperparameters")) {
      alg.hyperparameters = entry.at("hyperparameters");
      if (!alg.hyperparameters.is_object()) throw ConfigError("hyperparameters must be an object");
    }
    if (alg.name == "snvrg-pl" && config.problem.family == "nonconvex-logistic") {
      throw ConfigError("snvrg-pl needs a gradient-dominated problem family");
    }
    config.algorithms.push_back(std::move(alg));
  }

  config.epsilon = required<double>(doc, "epsilon");
  if (!(config.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  config.seeds = required<std::vector<std::uint64_t>>(doc, "seeds");
  if (config.seeds.empty()) throw ConfigError("seeds must be non-empty");
  config.eval_budget = required<std::uint64_t>(doc, "eval_budget");
  if (config.eval_budget == 0) throw ConfigError("eval_budget must be positive");
  config.log_every = hp_or<std::uint64_t>(doc, "log_every", 0);
  config.output_dir = hp_or<std::string>(doc, "output_dir", "bench-out");
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(doc);
}

void apply_seed_override(ExperimentConfig& config, const char* bench_seed) {
  if (bench_seed == nullptr || *bench_seed == '\0') return;
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(bench_seed);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      seeds.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("BENCH_SEED: cannot parse '" + item + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("BENCH_SEED is empty");
  config.seeds = std::move(seeds);
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kBudgetExhausted: return "budget_exhausted";
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kDiverged: return "diverged";
    case RunStatus::kFailed: return "failed";
  }
  return "unknown";
}

bool ExperimentSummary::all_ok() const {
  return std::none_of(runs.begin(), runs.end(), [](const RunOutcome& r) {
    return r.status == RunStatus::kDiverged || r.status == RunStatus::kFailed;
  });
}

// --- runs ---------------------------------------------------------------------

RunOutcome run_single(const ExperimentConfig& config, const AlgorithmConfig& alg,
                      std::uint64_t seed) {
  RunOutcome outcome;
  outcome.label = alg.label.empty() ? alg.name : alg.label;
  outcome.algorithm = alg.name;
  outcome.mode = alg.mode;
  outcome.seed = seed;
  outcome.derived = json::object();

  try {
    const auto problem = make_problem(config.problem);
    const Vector z0 = default_start_point(config.problem);
    const std::size_t n = problem->size();
    const double smoothness = problem->smoothness_bound();
    const double eps = config.epsilon;
    const json& hp = alg.hyperparameters;
    EvalCounter counter;
    GradientOracle oracle(*problem, counter);
    const RngStream rng(seed);

    const bool value_target = alg.name == "snvrg-pl";
    const double f_star = problem->optimum_value().value_or(0.0);
    if (value_target && !problem->optimum_value()) throw ConfigError("snvrg-pl needs a known optimum");
    auto reached = [=](const TrajectoryPoint& p) {
      return value_target ? p.f_value - f_star <= eps : p.grad_norm_sq <= eps * eps;
    };

    RunOptions options;
    options.max_evals = config.eval_budget;
    options.log_every = config.log_every;
    if (hp_or<bool>(hp, "stop_at_target", true)) options.stop_when = reached;

    auto sigma_sq = [&] {
      if (hp.contains("sigma_sq")) return hp.at("sigma_sq").get<double>();
      EvalCounter::ExemptScope exempt(counter);
      return oracle.variance_at(z0);
    };
    const double f_lower = hp_or<double>(hp, "f_lower_bound", 0.0);
    auto practical_schedule = [&](std::uint64_t base) {
      PracticalScaling scaling;
      scaling.step_multiplier = hp_or<double>(hp, "step_multiplier", 0.25);
      scaling.batch_multiplier = hp_or<double>(hp, "batch_multiplier", 0.05);
      outcome.derived["step_multiplier"] = scaling.step_multiplier;
      outcome.derived["batch_multiplier"] = scaling.batch_multiplier;
      return schedule_from_base_batch(base, smoothness, ScheduleMode::kPractical, scaling);
    };
    auto describe = [&](const ParamSchedule& s) {
      outcome.derived["K"] = s.depth;
      outcome.derived["M"] = s.step_param;
      outcome.derived["B"] = s.base_batch;
      outcome.derived["T"] = s.loop_lengths;
      outcome.derived["B_l"] = s.level_batches;
    };
    auto reports = [&](const RunRecord& record, const ParamSchedule& s) {
      for (const auto& stats : record.epochs) outcome.epoch_reports.push_back(census_check(stats, s, n));
    };

    if (alg.name == "snvrg") {
      ParamSchedule schedule;
      std::uint64_t epochs = 0;
      if (alg.mode == "paper") {
        const double sig = sigma_sq();
        const StationaryParams p = stationary_params_for(*problem, z0, eps, sig, f_lower);
        schedule = schedule_from_base_batch(p.base_batch, smoothness, ScheduleMode::kPaper);
        epochs = p.epochs;
        outcome.derived["sigma_sq"] = sig;
      } else {
        schedule = practical_schedule(hp_or<std::uint64_t>(hp, "base_batch", n));
        epochs = hp_or<std::uint64_t>(hp, "epochs",
                                      epochs_for_budget(config.eval_budget, census_prediction(schedule, n)));
      }
      describe(schedule);
      outcome.derived["S"] = epochs;
      SnvrgResult result = snvrg(z0, oracle, schedule, epochs, rng, options);
      outcome.record = std::move(result.record);
      reports(outcome.record, schedule);
    } else if (alg.name == "snvrg-pl") {
      ParamSchedule schedule;
      std::uint64_t epochs = 0;
      std::uint64_t stages = 0;
      if (alg.mode == "paper") {
        const double sig = sigma_sq();
        const DominatedParams p = dominated_params_for(*problem, z0, eps, sig, f_lower);
        schedule = schedule_from_base_batch(p.base_batch, smoothness, ScheduleMode::kPaper);
        epochs = p.epochs;
        stages = p.stages;
        outcome.derived["sigma_sq"] = sig;
      } else {
        schedule = practical_schedule(hp_or<std::uint64_t>(hp, "base_batch", n));
        epochs = hp_or<std::uint64_t>(hp, "epochs", 2);
        stages = hp_or<std::uint64_t>(
            hp, "stages", epochs_for_budget(config.eval_budget, epochs * census_prediction(schedule, n)));
      }
      describe(schedule);
      outcome.derived["S"] = epochs;
      outcome.derived["U"] = stages;
      PlResult result = snvrg_pl(z0, oracle, schedule, epochs, stages, rng, options);
      outcome.record = std::move(result.record);
      reports(outcome.record, schedule);
    } else if (alg.name == "gd") {
      const double eta = hp_or<double>(hp, "eta", 1.0 / smoothness);
      const auto steps = hp_or<std::uint64_t>(hp, "steps", epochs_for_budget(config.eval_budget, n));
      outcome.derived = {{"eta", eta}, {"steps", steps}};
      outcome.record = gd(z0, oracle, steps, eta, options);
    } else if (alg.name == "sgd") {
      const auto batch = hp_or<std::size_t>(hp, "batch", 1);
      const double eta = hp_or<double>(hp, "eta", 0.5 / smoothness);
      const auto steps = hp_or<std::uint64_t>(hp, "steps", epochs_for_budget(config.eval_budget, batch));
      outcome.derived = {{"eta", eta}, {"steps", steps}, {"batch", batch}};
      outcome.record = sgd(z0, oracle, steps, eta, batch, rng, options);
    } else if (alg.name == "svrg") {
      const SvrgDefaults d = svrg_defaults(n, smoothness);
      const auto inner = hp_or<std::uint64_t>(hp, "inner_len", d.inner_len);
      const auto batch = hp_or<std::size_t>(hp, "batch", d.batch);
      const double eta = hp_or<double>(hp, "eta", d.eta);
      const auto epochs =
          hp_or<std::uint64_t>(hp, "epochs", epochs_for_budget(config.eval_budget, n + 2 * inner * batch));
      outcome.derived = {{"eta", eta}, {"epochs", epochs}, {"inner_len", inner}, {"batch", batch}};
      outcome.record = svrg(z0, oracle, epochs, inner, eta, batch, rng, options);
    } else if (alg.name == "scsg") {
      const auto default_base = static_cast<std::size_t>(std::min<double>(
          static_cast<double>(n), std::max(2.0, std::ceil(1.0 / (eps * eps)))));
      const auto base = hp_or<std::size_t>(hp, "base_batch", default_base);
      const auto mini = hp_or<std::size_t>(hp, "mini_batch", 1);
      const double eta = hp_or<double>(hp, "eta", scsg_default_eta(base, mini, smoothness));
      const auto epochs =
          hp_or<std::uint64_t>(hp, "epochs", epochs_for_budget(config.eval_budget, 3 * base));
      outcome.derived = {{"eta", eta}, {"epochs", epochs}, {"base_batch", base}, {"mini_batch", mini}};
      outcome.record = scsg(z0, oracle, epochs, base, mini, eta, rng, options);
    } else {
      throw ConfigError("unknown algorithm '" + alg.name + "'");
    }
    outcome.record.seed = seed;

    for (const auto& p : outcome.record.trajectory) {
      if (reached(p)) {
        outcome.evals_to_target = p.evals;
        break;
      }
    }
    if (outcome.evals_to_target) {
      outcome.status = RunStatus::kConverged;
    } else if (outcome.record.budget_exhausted) {
      outcome.status = RunStatus::kBudgetExhausted;
    } else {
      outcome.status = RunStatus::kCompleted;
    }
  } catch (const DivergenceError& e) {
    outcome.status = RunStatus::kDiverged;
    outcome.message = e.what();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    outcome.status = RunStatus::kFailed;
    outcome.message = e.what();
  }
  return outcome;
}

void write_trajectory_csv(std::ostream& out, const RunRecord& record) {
  out << "evals,iter,f_value,grad_norm_sq\n";
  for (const auto& p : record.trajectory) {
    out << p.evals << ',' << p.iter << ',' << format_double(p.f_value) << ','
        << format_double(p.grad_norm_sq) << '\n';
  }
}

json outcome_to_json(const RunOutcome& o) {
  json j;
  j["label"] = o.label;
  j["algorithm"] = o.algorithm;
  j["mode"] = o.mode;
  j["seed"] = o.seed;
  j["status"] = to_string(o.status);
  j["message"] = o.message;
  j["parameters"] = o.derived;
  j["total_evals"] = o.record.total_evals;
  j["iterations"] = o.record.iterations;
  j["budget_exhausted"] = o.record.budget_exhausted;
  j["evals_to_target"] = o.evals_to_target ? json(*o.evals_to_target) : json(nullptr);
  if (!o.record.trajectory.empty()) {
    j["final_f_value"] = o.record.trajectory.back().f_value;
    j["final_grad_norm_sq"] = o.record.trajectory.back().grad_norm_sq;
  }
  json complexity = json::array();
  for (std::size_t e = 0; e < o.epoch_reports.size(); ++e) {
    const auto& r = o.epoch_reports[e];
    complexity.push_back({{"epoch", e + 1},
                          {"measured", r.measured},
                          {"formula_count", r.formula_count},
                          {"count_bound", r.count_bound}});
  }
  j["complexity"] = std::move(complexity);
  return j;
}

ExperimentSummary run_experiment(const ExperimentConfig& config, int jobs) {
  struct Task {
    const AlgorithmConfig* alg;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& alg : config.algorithms) {
    for (auto seed : config.seeds) tasks.push_back({&alg, seed});
  }

  std::filesystem::create_directories(config.output_dir);
  ExperimentSummary summary;
  summary.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      RunOutcome outcome = run_single(config, *tasks[i].alg, tasks[i].seed);
      const auto dir = config.output_dir / outcome.label / std::to_string(outcome.seed);
      std::filesystem::create_directories(dir);
      std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
      write_trajectory_csv(csv, outcome.record);
      std::ofstream js(dir / "summary.json", std::ios::binary);
      js << outcome_to_json(outcome).dump(2) << '\n';
      summary.runs[i] = std::move(outcome);
    }
  };
  const int threads = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(1, tasks.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  json top;
  top["problem"] = {{"family", config.problem.family},
                    {"n", config.problem.n},
                    {"d", config.problem.d},
                    {"seed", config.problem.seed},
                    {"alpha", config.problem.alpha}};
  top["epsilon"] = config.epsilon;
  top["eval_budget"] = config.eval_budget;
  top["seeds"] = config.seeds;
  json runs = json::array();
  for (const auto& r : summary.runs) {
    runs.push_back({{"label", r.label},
                    {"seed", r.seed},
                    {"status", to_string(r.status)},
                    {"total_evals", r.record.total_evals},
                    {"evals_to_target", r.evals_to_target ? json(*r.evals_to_target) : json(nullptr)}});
  }
  top["runs"] = std::move(runs);
  top["all_ok"] = summary.all_ok();
  std::ofstream out(config.output_dir / "summary.json", std::ios::binary);
  out << top.dump(2) << '\n';
  return summary;
}

// --- curves -------------------------------------------------------------------

std::vector<CurveRow> emit_curves(const std::vector<double>& n_grid,
                                  const std::vector<double>& eps_grid,
                                  const std::filesystem::path& output_path) {
  if (n_grid.empty() || eps_grid.empty()) throw InputError("curve grids must be non-empty");
  std::vector<CurveRow> rows;
  for (double n : n_grid) {
    for (double eps : eps_grid) {
      for (const auto& c : table1_curves(n, eps)) rows.push_back({c.algorithm, c.n, c.epsilon, c.complexity});
    }
  }
  if (output_path.has_parent_path()) std::filesystem::create_directories(output_path.parent_path());
  std::ofstream out(output_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + output_path.string());
  out << "algorithm,n,epsilon,complexity\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << format_double(r.n) << ',' << format_double(r.epsilon) << ','
        << format_double(r.complexity) << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + output_path.string());
  return rows;
}

std::vector<CurveRow> read_curves_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "algorithm,n,epsilon,complexity") throw std::runtime_error("unexpected curve CSV header");
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string alg, n, eps, c;
    std::getline(ss, alg, ',');
    std::getline(ss, n, ',');
    std::getline(ss, eps, ',');
    std::getline(ss, c, ',');
    rows.push_back({alg, std::stod(n), std::stod(eps), std::stod(c)});
  }
  return rows;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.rfind("log:", 0) == 0) {
    std::stringstream ss(text.substr(4));
    std::string lo, hi, count;
    std::getline(ss, lo, ':');
    std::getline(ss, hi, ':');
    std::getline(ss, count, ':');
    const double a = std::log10(std::stod(lo));
    const double b = std::log10(std::stod(hi));
    const int k = std::stoi(count);
    if (k < 1) throw InputError("grid count must be >= 1");
    for (int i = 0; i < k; ++i) {
      const double frac = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
      out.push_back(std::pow(10.0, a + (b - a) * frac));
    }
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw InputError("empty grid '" + text + "'");
  return out;
}

// --- verification -------------------------------------------------------------

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  std::vector<CheckResult> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  };

  // Schedules and the per-epoch accounting chain.
  for (std::uint64_t b : {4ULL, 16ULL, 256ULL}) {
    const ParamSchedule s = schedule_from_base_batch(b, 1.0);
    const bool sqrt_ok = s.total_length() * s.total_length() == b;
    const ComplexityReport r = epoch_cost_formula(s);
    const bool chain = r.measured <= r.formula_count && r.formula_count <= r.count_bound;
    add("schedule B=" + std::to_string(b), sqrt_ok && chain,
        "K=" + std::to_string(s.depth) + " prod T=" + std::to_string(s.total_length()) +
            " census=" + std::to_string(r.measured) + " formula=" + std::to_string(r.formula_count) +
            " 7Blog^3B=" + std::to_string(r.count_bound));
  }
  for (std::uint64_t b : {4ULL, 16ULL}) {
    const ParamSchedule s = schedule_from_base_batch(b, 1.0);
    const std::size_t n = s.level_batches.front();
    RngStream data(seed, {b});
    std::vector<double> h(n);
    std::vector<Vector> c(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = 0.5 + data.uniform01();
      c[i] = Vector::Constant(2, data.normal());
    }
    ToyProblem toy(h, c);
    EvalCounter counter;
    GradientOracle oracle(toy, counter);
    try {
      const EpochResult e = one_epoch_snvrg(Vector::Ones(2), oracle, s, RngStream(seed));
      const ComplexityReport r = census_check(e.stats, s, n);
      add("epoch census B=" + std::to_string(b), r.measured == counter.counted(),
          "counter=" + std::to_string(counter.counted()) + " measured=" + std::to_string(r.measured));
    } catch (const std::exception& ex) {
      add("epoch census B=" + std::to_string(b), false, ex.what());
    }
  }

  // Constant series: recurrence vs closed form, and the comparison inequalities.
  for (std::uint64_t b : {4ULL, 16ULL, 256ULL}) {
    const ParamSchedule s = schedule_from_base_batch(b, 1.0);
    const AnalysisConstants c = analysis_constants(s, 1.0);
    double worst = 0.0;
    for (int lvl = 1; lvl <= s.depth; ++lvl) {
      for (std::uint64_t j = 0; j <= c.length(lvl); ++j) {
        const double closed = analysis_constant_closed_form(s, 1.0, lvl, j);
        worst = std::max(worst, std::abs(closed - c.at(lvl, j)) / std::max(1e-300, std::abs(closed)));
      }
    }
    const InequalityReport ineq = step_inequality_check(c, s);
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : ineq.margins) min_margin = std::min(min_margin, m.margin());
    add("constant series B=" + std::to_string(b), worst <= 1e-10 && ineq.ok && min_margin > 0.0,
        "max rel diff=" + format_double(worst) + " min margin=" + format_double(min_margin));
  }

  // Without-replacement subset variance: enumeration vs closed form vs bound.
  {
    RngStream rng(seed, {0xB3});
    double worst = 0.0;
    bool bound_ok = true;
    for (int family = 0; family < 200; ++family) {
      const std::size_t big_n = 2 + rng.uniform_below(7);
      std::vector<Vector> a(big_n, Vector::Zero(3));
      Vector mean = Vector::Zero(3);
      for (auto& v : a) {
        for (int k = 0; k < 3; ++k) v(k) = rng.normal();
        mean += v;
      }
      mean /= static_cast<double>(big_n);
      for (auto& v : a) v -= mean;
      for (std::size_t m = 1; m <= big_n; ++m) {
        const double exact = subset_mean_sqnorm_exact(a, m);
        worst = std::max(worst, std::abs(exact - subset_mean_sqnorm_closed_form(a, m)));
        bound_ok = bound_ok && exact <= subset_mean_sqnorm_bound(a, m) + 1e-12;
      }
    }
    add("subset variance identity", worst <= 1e-12 && bound_ok,
        "max |enum - closed form|=" + format_double(worst));
  }

  // Theoretical curves.
  {
    const auto ns = parse_grid("log:1e2:1e8:20");
    const auto es = parse_grid("log:1e-4:1e-1:20");
    bool ok = true;
    for (double n : ns) {
      for (double e : es) {
        const auto c = table1_curves(n, e);
        ok = ok && c[4].complexity <= c[3].complexity && c[3].complexity <= c[2].complexity;
      }
    }
    const auto c = table1_curves(1e8, 1e-2);
    const double ratio = c[4].complexity / c[3].complexity;
    const bool ratio_ok = std::abs(ratio - std::pow(10.0, -2.0 / 3.0)) <= 1e-12;
    add("curve dominance", ok && ratio_ok, "snvrg/scsg at n=1e8 eps=1e-2: " + format_double(ratio));
  }
  return checks;
}

}  // namespace snvrg
