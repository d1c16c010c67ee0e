#ifndef SNVRG_BENCH_HPP
#define SNVRG_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snvrg/accounting.hpp"
#include "snvrg/drivers.hpp"
#include "snvrg/objectives.hpp"

namespace snvrg {

struct AlgorithmConfig {
  std::string name;                 // snvrg | snvrg-pl | gd | sgd | svrg | scsg
  std::string mode = "practical";   // paper | practical
  std::string label;                // output directory name; defaults to name
  nlohmann::json hyperparameters = nlohmann::json::object();
};

struct ExperimentConfig {
  ProblemSpec problem;
  std::vector<AlgorithmConfig> algorithms;
  double epsilon = 1e-3;
  std::vector<std::uint64_t> seeds;
  std::uint64_t eval_budget = 0;
  std::uint64_t log_every = 0;  // 0: once per epoch
  std::filesystem::path output_dir = "bench-out";
};

/// Throws ConfigError on schema violations.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// BENCH_SEED="7" or "1,2,3" replaces the configured seeds.
void apply_seed_override(ExperimentConfig& config, const char* bench_seed);

enum class RunStatus { kConverged, kBudgetExhausted, kCompleted, kDiverged, kFailed };
std::string to_string(RunStatus status);

struct RunOutcome {
  std::string label;
  std::string algorithm;
  std::string mode;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::kCompleted;
  std::string message;
  RunRecord record;
  std::optional<std::uint64_t> evals_to_target;
  std::vector<ComplexityReport> epoch_reports;  // one per nested epoch
  nlohmann::json derived;                       // resolved hyperparameters
};

struct ExperimentSummary {
  std::vector<RunOutcome> runs;
  bool all_ok() const;
};

/// Runs every (algorithm, seed) pair and writes
///   <out>/<label>/<seed>/trajectory.csv, <out>/<label>/<seed>/summary.json,
///   <out>/summary.json.
ExperimentSummary run_experiment(const ExperimentConfig& config, int jobs = 1);

/// Single run without file output.
RunOutcome run_single(const ExperimentConfig& config, const AlgorithmConfig& algorithm,
                      std::uint64_t seed);

/// Header "evals,iter,f_value,grad_norm_sq".
void write_trajectory_csv(std::ostream& out, const RunRecord& record);

nlohmann::json outcome_to_json(const RunOutcome& outcome);

// --- curves -----------------------------------------------------------------

struct CurveRow {
  std::string algorithm;
  double n;
  double epsilon;
  double complexity;
};

/// CSV with columns algorithm,n,epsilon,complexity for every grid point.
std::vector<CurveRow> emit_curves(const std::vector<double>& n_grid,
                                  const std::vector<double>& eps_grid,
                                  const std::filesystem::path& output_path);
std::vector<CurveRow> read_curves_csv(const std::filesystem::path& path);

/// "1e2,1e4" or "log:1e2:1e8:20" (log-spaced, endpoints included).
std::vector<double> parse_grid(const std::string& text);

// --- verification -----------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Accounting, constant-series, sampling-identity and curve checks.
std::vector<CheckResult> run_verification(std::uint64_t seed = 2024);

}  // namespace snvrg

#endif  // SNVRG_BENCH_HPP
