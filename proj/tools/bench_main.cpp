#include <cstdio>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "snvrg/bench.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int cmd_run(const std::string& config_path, const std::string& output, int jobs) {
  snvrg::ExperimentConfig config = snvrg::load_experiment_config(config_path);
  snvrg::apply_seed_override(config, std::getenv("BENCH_SEED"));
  if (!output.empty()) config.output_dir = output;

  const snvrg::ExperimentSummary summary = snvrg::run_experiment(config, jobs);
  for (const auto& r : summary.runs) {
    std::printf("%-16s seed=%-8llu %-17s evals=%-12llu", r.label.c_str(),
                static_cast<unsigned long long>(r.seed), snvrg::to_string(r.status).c_str(),
                static_cast<unsigned long long>(r.record.total_evals));
    if (r.evals_to_target) {
      std::printf(" target@%llu", static_cast<unsigned long long>(*r.evals_to_target));
    }
    if (!r.message.empty()) std::printf("  %s", r.message.c_str());
    std::printf("\n");
  }
  std::printf("wrote %s\n", (config.output_dir / "summary.json").string().c_str());
  return summary.all_ok() ? 0 : kExitFailure;
}

int cmd_curves(const std::string& n_grid, const std::string& eps_grid, const std::string& out) {
  const auto rows = snvrg::emit_curves(snvrg::parse_grid(n_grid), snvrg::parse_grid(eps_grid), out);
  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return 0;
}

int cmd_verify(std::uint64_t seed) {
  const auto checks = snvrg::run_verification(seed);
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("%-4s  %-28s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nested variance-reduction benchmark driver"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "Output directory (overrides output_dir)");
  run->add_option("-j,--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string n_grid = "log:1e2:1e8:25";
  std::string eps_grid = "log:1e-4:1e-1:16";
  std::string curves_out = "curves.csv";
  auto* curves = app.add_subcommand("curves", "Emit theoretical complexity curves as CSV");
  curves->add_option("--n-grid", n_grid, "Comma list or log:lo:hi:count");
  curves->add_option("--eps-grid", eps_grid, "Comma list or log:lo:hi:count");
  curves->add_option("--out", curves_out, "CSV path");

  std::uint64_t verify_seed = 2024;
  auto* verify = app.add_subcommand("verify", "Run the accounting and identity checks");
  verify->add_option("--seed", verify_seed, "Seed for the randomized checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, output, jobs);
    if (*curves) return cmd_curves(n_grid, eps_grid, curves_out);
    if (*verify) return cmd_verify(verify_seed);
  } catch (const snvrg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
