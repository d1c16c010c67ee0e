#include "snvrg/drivers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace snvrg {
namespace {

constexpr std::uint64_t kEpochStream = 0x45504F43;   // "EPOC"
constexpr std::uint64_t kSelectStream = 0x53454C45;  // "SELE"
constexpr std::uint64_t kStageStream = 0x53544147;   // "STAG"
constexpr std::uint64_t kLengthStream = 0x4C454E47;  // "LENG"

// Measurement probes: exact F and ||grad F||^2 through the exempt channel.
class Prober {
 public:
  Prober(const GradientOracle& oracle, RunRecord& record, const RunOptions& options)
      : oracle_(oracle), record_(record), options_(options) {}

  void probe(std::uint64_t iter, const Vector& x) {
    const std::uint64_t evals = oracle_.counter().counted();
    if (!record_.trajectory.empty() && evals <= record_.trajectory.back().evals) return;
    TrajectoryPoint p;
    {
      EvalCounter::ExemptScope exempt(oracle_.counter());
      p.grad_norm_sq = oracle_.full_gradient(x).squaredNorm();
    }
    p.evals = evals;
    p.iter = iter;
    p.f_value = oracle_.problem().value(x);
    record_.trajectory.push_back(p);
    if (options_.stop_when && options_.stop_when(p)) record_.stopped_at_target = true;
  }

  bool should_stop() {
    if (record_.stopped_at_target) return true;
    if (oracle_.counter().counted() >= options_.max_evals) {
      record_.budget_exhausted = true;
      return true;
    }
    return false;
  }

 private:
  const GradientOracle& oracle_;
  RunRecord& record_;
  const RunOptions& options_;
};

void guard(const Vector& x, std::uint64_t iteration, const char* where) {
  if (!x.allFinite()) throw DivergenceError(iteration, where);
}

std::uint64_t ceil_positive(double v) {
  if (!std::isfinite(v)) throw InputError("parameter formula produced a non-finite value");
  if (v <= 0.0) return 0;
  if (v >= 18446744073709551615.0) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::ceil(v));
}

// Shared epoch loop for snvrg; `stage` offsets the iteration count.
SnvrgResult run_snvrg(const Vector& z0, const GradientOracle& oracle,
                      const ParamSchedule& schedule, std::uint64_t epochs, const RngStream& rng,
                      const RunOptions& options, RunRecord& record, Prober& prober,
                      std::uint64_t iter_offset) {
  if (epochs < 1) throw InputError("snvrg: S must be >= 1");
  SnvrgResult out;
  const std::uint64_t total = schedule.total_length();
  const std::uint64_t log_every = options.log_every == 0 ? total : options.log_every;
  Vector z = z0;
  if (record.trajectory.empty()) prober.probe(iter_offset, z);

  for (std::uint64_t s = 1; s <= epochs; ++s) {
    if (s > 1 && prober.should_stop()) break;
    const std::uint64_t base_iter = iter_offset + (s - 1) * total;
    StepObserver observer;
    if (log_every < total) {
      observer = [&](const StepView& view) {
        const std::uint64_t iter = base_iter + view.t;
        if (view.t > 0 && iter % log_every == 0) prober.probe(iter, view.state.x);
      };
    }
    EpochResult epoch = one_epoch_snvrg(z, oracle, schedule, rng.child({kEpochStream, s}), observer);
    z = std::move(epoch.x_end);
    out.epoch_outputs.push_back(std::move(epoch.x_out));
    record.epochs.push_back(std::move(epoch.stats));
    record.iterations = base_iter + total;
    prober.probe(record.iterations, z);
  }
  if (!record.budget_exhausted && oracle.counter().counted() >= options.max_evals) {
    record.budget_exhausted = true;
  }
  RngStream select = rng.child(kSelectStream);
  const std::uint64_t pick = select.uniform_below(out.epoch_outputs.size());
  out.selected_epoch = pick + 1;
  out.y_out = out.epoch_outputs[pick];
  out.z_end = z;
  return out;
}

}  // namespace

SnvrgResult snvrg(const Vector& z0, const GradientOracle& oracle, const ParamSchedule& schedule,
                  std::uint64_t epochs, const RngStream& rng, const RunOptions& options) {
  RunRecord record;
  record.algorithm = "snvrg";
  record.seed = rng.master_seed();
  record.parameters = {{"K", schedule.depth},
                       {"M", schedule.step_param},
                       {"B", static_cast<double>(schedule.base_batch)},
                       {"S", static_cast<double>(epochs)}};
  const std::uint64_t start = oracle.counter().counted();
  Prober prober(oracle, record, options);
  SnvrgResult out = run_snvrg(z0, oracle, schedule, epochs, rng, options, record, prober, 0);
  record.output_point = out.y_out;
  record.total_evals = oracle.counter().counted() - start;
  out.record = std::move(record);
  return out;
}

PlResult snvrg_pl(const Vector& z0, const GradientOracle& oracle, const ParamSchedule& schedule,
                  std::uint64_t epochs, std::uint64_t stages, const RngStream& rng,
                  const RunOptions& options) {
  if (!oracle.problem().gradient_dominance()) {
    throw ConfigError("snvrg-pl requires a gradient-dominated problem (tau unset)");
  }
  if (epochs < 1 || stages < 1) throw InputError("snvrg-pl: S and U must be >= 1");
  PlResult out;
  RunRecord& record = out.record;
  record.algorithm = "snvrg-pl";
  record.seed = rng.master_seed();
  record.parameters = {{"K", schedule.depth},
                       {"M", schedule.step_param},
                       {"B", static_cast<double>(schedule.base_batch)},
                       {"S", static_cast<double>(epochs)},
                       {"U", static_cast<double>(stages)}};
  const std::uint64_t start = oracle.counter().counted();
  Prober prober(oracle, record, options);
  out.stages.push_back(z0);
  Vector z = z0;
  for (std::uint64_t u = 1; u <= stages; ++u) {
    if (u > 1 && prober.should_stop()) break;
    SnvrgResult stage = run_snvrg(z, oracle, schedule, epochs, rng.child({kStageStream, u}), options,
                                  record, prober, record.iterations);
    z = std::move(stage.y_out);
    out.stages.push_back(z);
  }
  out.z_out = z;
  record.output_point = z;
  record.total_evals = oracle.counter().counted() - start;
  return out;
}

StationaryParams stationary_params(std::uint64_t n, double smoothness, double delta,
                                   double epsilon, double sigma_sq, double constant) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (sigma_sq < 0.0) throw InputError("sigma^2 must be non-negative");
  if (n < 2) throw InputError("need n >= 2");
  StationaryParams p{};
  const std::uint64_t wanted = std::max<std::uint64_t>(2, ceil_positive(2.0 * constant * sigma_sq / (epsilon * epsilon)));
  p.base_batch = std::min(n, wanted);
  const double s = 2.0 * constant * smoothness * std::max(0.0, delta) /
                   (std::sqrt(static_cast<double>(p.base_batch)) * epsilon * epsilon);
  p.epochs = std::max<std::uint64_t>(1, ceil_positive(s));
  return p;
}

StationaryParams stationary_params_for(const FiniteSumProblem& problem, const Vector& z0,
                                  double epsilon, double sigma_sq, double f_lower_bound,
                                  double constant) {
  return stationary_params(problem.size(), problem.smoothness_bound(),
                           problem.value(z0) - f_lower_bound, epsilon, sigma_sq, constant);
}

DominatedParams dominated_params(std::uint64_t n, double smoothness, double tau, double delta,
                                 double epsilon, double sigma_sq, double constant) {
  if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  if (!(tau > 0.0)) throw InputError("tau must be positive");
  if (sigma_sq < 0.0) throw InputError("sigma^2 must be non-negative");
  if (n < 2) throw InputError("need n >= 2");
  DominatedParams p{};
  const std::uint64_t wanted = std::max<std::uint64_t>(2, ceil_positive(4.0 * constant * tau * sigma_sq / epsilon));
  p.base_batch = std::min(n, wanted);
  p.epochs = std::max<std::uint64_t>(
      1, ceil_positive(2.0 * constant * tau * smoothness / std::sqrt(static_cast<double>(p.base_batch))));
  const double ratio = 2.0 * std::max(0.0, delta) / epsilon;
  p.stages = ratio > 1.0 ? std::max<std::uint64_t>(1, ceil_positive(std::log2(ratio))) : 1;
  return p;
}

DominatedParams dominated_params_for(const FiniteSumProblem& problem, const Vector& z0,
                                 double epsilon, double sigma_sq, double f_lower_bound,
                                 double constant) {
  const auto tau = problem.gradient_dominance();
  if (!tau) throw ConfigError("gradient-dominated parameters need tau");
  return dominated_params(problem.size(), problem.smoothness_bound(), *tau,
                          problem.value(z0) - f_lower_bound, epsilon, sigma_sq, constant);
}

// --- baselines --------------------------------------------------------------

RunRecord gd(const Vector& z0, const GradientOracle& oracle, std::uint64_t steps, double eta,
             const RunOptions& options) {
  if (!(eta > 0.0)) throw InputError("gd: eta must be positive");
  RunRecord record;
  record.algorithm = "gd";
  record.parameters = {{"eta", eta}, {"steps", static_cast<double>(steps)}};
  const std::uint64_t start = oracle.counter().counted();
  const std::uint64_t log_every = std::max<std::uint64_t>(1, options.log_every);
  Prober prober(oracle, record, options);
  Vector x = z0;
  prober.probe(0, x);
  for (std::uint64_t k = 0; k < steps; ++k) {
    if (prober.should_stop()) break;
    x.noalias() -= eta * oracle.full_gradient(x);
    guard(x, k + 1, "gd");
    record.iterations = k + 1;
    if (record.iterations % log_every == 0) prober.probe(record.iterations, x);
  }
  prober.probe(record.iterations, x);
  record.output_point = x;
  record.total_evals = oracle.counter().counted() - start;
  return record;
}

RunRecord sgd(const Vector& z0, const GradientOracle& oracle, std::uint64_t steps, double eta,
              std::size_t batch, const RngStream& rng, const RunOptions& options) {
  if (!(eta > 0.0)) throw InputError("sgd: eta must be positive");
  const std::size_t n = oracle.problem().size();
  if (batch == 0 || batch > n) throw InputError("sgd: need 1 <= batch <= n");
  RunRecord record;
  record.algorithm = "sgd";
  record.seed = rng.master_seed();
  record.parameters = {{"eta", eta}, {"steps", static_cast<double>(steps)}, {"batch", static_cast<double>(batch)}};
  const std::uint64_t start = oracle.counter().counted();
  const std::uint64_t log_every = std::max<std::uint64_t>(1, options.log_every);
  Prober prober(oracle, record, options);
  const RngStream samples = rng.child(kSampleStream);
  Vector x = z0;
  prober.probe(0, x);
  for (std::uint64_t k = 0; k < steps; ++k) {
    if (prober.should_stop()) break;
    RngStream step_rng = samples.child(k);
    const IndexSet idx = sample_without_replacement(step_rng, n, batch);
    x.noalias() -= eta * oracle.batch_gradient(idx, x);
    guard(x, k + 1, "sgd");
    record.iterations = k + 1;
    if (record.iterations % log_every == 0) prober.probe(record.iterations, x);
  }
  prober.probe(record.iterations, x);
  record.output_point = x;
  record.total_evals = oracle.counter().counted() - start;
  return record;
}

namespace {

// Inner SVRG-style loop shared by svrg and scsg. Step t draws its batch from
// the level-1 stream of iteration t, matching the nested epoch keying.
void variance_reduced_inner(Vector& x, const Vector& snapshot, const Vector& anchor_gradient,
                            const GradientOracle& oracle, std::uint64_t length, double eta,
                            std::size_t batch, const RngStream& epoch_rng, std::uint64_t iter_base,
                            std::uint64_t log_every, Prober& prober, RunRecord& record) {
  const std::size_t n = oracle.problem().size();
  const RngStream samples = epoch_rng.child(kSampleStream);
  for (std::uint64_t t = 0; t < length; ++t) {
    RngStream step_rng = samples.child({t, std::uint64_t{1}});
    const IndexSet idx = sample_without_replacement(step_rng, n, batch);
    const Vector v = anchor_gradient + oracle.batch_gradient_difference(idx, x, snapshot);
    x.noalias() -= eta * v;
    guard(x, iter_base + t + 1, record.algorithm.c_str());
    record.iterations = iter_base + t + 1;
    if (log_every != 0 && record.iterations % log_every == 0) prober.probe(record.iterations, x);
  }
}

}  // namespace

RunRecord svrg(const Vector& z0, const GradientOracle& oracle, std::uint64_t epochs,
               std::uint64_t inner_len, double eta, std::size_t batch, const RngStream& rng,
               const RunOptions& options) {
  if (inner_len < 1) throw InputError("svrg: inner_len must be >= 1");
  if (!(eta > 0.0)) throw InputError("svrg: eta must be positive");
  const std::size_t n = oracle.problem().size();
  if (batch == 0 || batch > n) throw InputError("svrg: need 1 <= batch <= n");
  RunRecord record;
  record.algorithm = "svrg";
  record.seed = rng.master_seed();
  record.parameters = {{"eta", eta},
                       {"epochs", static_cast<double>(epochs)},
                       {"inner_len", static_cast<double>(inner_len)},
                       {"batch", static_cast<double>(batch)}};
  const std::uint64_t start = oracle.counter().counted();
  Prober prober(oracle, record, options);
  Vector x = z0;
  prober.probe(0, x);
  for (std::uint64_t s = 1; s <= epochs; ++s) {
    if (prober.should_stop()) break;
    const Vector snapshot = x;
    const Vector anchor = oracle.full_gradient(snapshot);
    const std::uint64_t base = record.iterations;
    variance_reduced_inner(x, snapshot, anchor, oracle, inner_len, eta, batch,
                           rng.child({kEpochStream, s}), base, options.log_every, prober, record);
    prober.probe(record.iterations, x);
  }
  record.output_point = x;
  record.total_evals = oracle.counter().counted() - start;
  return record;
}

SvrgDefaults svrg_defaults(std::size_t n, double smoothness) {
  const double nn = static_cast<double>(n);
  return {static_cast<std::uint64_t>(n), 1, 1.0 / (3.0 * smoothness * std::pow(nn, 2.0 / 3.0))};
}

std::uint64_t sample_geometric(RngStream& rng, double mean) {
  if (!(mean > 0.0)) throw InputError("geometric mean must be positive");
  const double g = mean / (1.0 + mean);
  const double u = 1.0 - rng.uniform01();  // (0, 1]
  return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(g)));
}

double scsg_default_eta(std::size_t base_batch, std::size_t mini_batch, double smoothness) {
  const double ratio = static_cast<double>(base_batch) / static_cast<double>(mini_batch);
  return 1.0 / (3.0 * smoothness * std::pow(ratio, 2.0 / 3.0));
}

RunRecord scsg(const Vector& z0, const GradientOracle& oracle, std::uint64_t epochs,
               std::size_t base_batch, std::size_t mini_batch, double eta, const RngStream& rng,
               const RunOptions& options, const ScsgOptions& scsg_options) {
  const std::size_t n = oracle.problem().size();
  if (base_batch == 0 || base_batch > n) throw InputError("scsg: need 1 <= base_batch <= n");
  if (mini_batch == 0 || mini_batch > n) throw InputError("scsg: need 1 <= mini_batch <= n");
  if (!(eta > 0.0)) throw InputError("scsg: eta must be positive");
  RunRecord record;
  record.algorithm = "scsg";
  record.seed = rng.master_seed();
  record.parameters = {{"eta", eta},
                       {"epochs", static_cast<double>(epochs)},
                       {"base_batch", static_cast<double>(base_batch)},
                       {"mini_batch", static_cast<double>(mini_batch)}};
  const std::uint64_t start = oracle.counter().counted();
  Prober prober(oracle, record, options);
  const double mean_len = static_cast<double>(base_batch) / static_cast<double>(mini_batch);
  Vector x = z0;
  prober.probe(0, x);
  for (std::uint64_t s = 1; s <= epochs; ++s) {
    if (prober.should_stop()) break;
    const RngStream epoch_rng = rng.child({kEpochStream, s});
    RngStream anchor_rng = epoch_rng.child({kSampleStream, std::uint64_t{0}, std::uint64_t{0}});
    const Vector snapshot = x;
    const Vector anchor =
        oracle.batch_gradient(sample_without_replacement(anchor_rng, n, base_batch), snapshot);
    std::uint64_t length = scsg_options.fixed_inner_len;
    if (length == 0) {
      RngStream length_rng = epoch_rng.child(kLengthStream);
      length = sample_geometric(length_rng, mean_len);
    }
    variance_reduced_inner(x, snapshot, anchor, oracle, length, eta, mini_batch, epoch_rng,
                           record.iterations, options.log_every, prober, record);
    prober.probe(record.iterations, x);
  }
  record.output_point = x;
  record.total_evals = oracle.counter().counted() - start;
  return record;
}

}  // namespace snvrg
