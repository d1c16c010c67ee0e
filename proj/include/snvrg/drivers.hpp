#ifndef SNVRG_DRIVERS_HPP
#define SNVRG_DRIVERS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "snvrg/nested_vr.hpp"
#include "snvrg/objectives.hpp"
#include "snvrg/sampling.hpp"

namespace snvrg {

/// The constant of the single-epoch bound; also used for C_1 in the
/// gradient-dominated parameter choices.
inline constexpr double kBoundConstant = 600.0;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TrajectoryPoint {
  std::uint64_t evals = 0;
  std::uint64_t iter = 0;
  double f_value = 0.0;
  double grad_norm_sq = 0.0;
};

struct RunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<TrajectoryPoint> trajectory;  // evals strictly increasing
  Vector output_point;
  std::uint64_t total_evals = 0;
  std::uint64_t iterations = 0;
  bool budget_exhausted = false;
  bool stopped_at_target = false;
  std::vector<EpochStats> epochs;  // nested-epoch drivers only
};

struct RunOptions {
  std::uint64_t max_evals = std::numeric_limits<std::uint64_t>::max();
  /// Iterations between measurement probes; 0 probes once per epoch
  /// (per step for GD/SGD).
  std::uint64_t log_every = 0;
  /// Checked at each probe; true ends the run at the next epoch boundary.
  std::function<bool(const TrajectoryPoint&)> stop_when;
};

// --- nested variance reduction ----------------------------------------------

struct SnvrgResult {
  Vector y_out;
  Vector z_end;                   // z_S
  std::vector<Vector> epoch_outputs;  // y_1..y_S
  std::uint64_t selected_epoch = 0;   // 1-based s with y_out = y_s
  RunRecord record;
};

/// S chained epochs; y_out is drawn uniformly from the epoch outputs.
SnvrgResult snvrg(const Vector& z0, const GradientOracle& oracle, const ParamSchedule& schedule,
                  std::uint64_t epochs, const RngStream& rng, const RunOptions& options = {});

struct PlResult {
  Vector z_out;
  std::vector<Vector> stages;  // z_0..z_U
  RunRecord record;
};

/// U restarts of snvrg, each from the previous stage output.
PlResult snvrg_pl(const Vector& z0, const GradientOracle& oracle, const ParamSchedule& schedule,
                  std::uint64_t epochs, std::uint64_t stages, const RngStream& rng,
                  const RunOptions& options = {});

struct StationaryParams {
  std::uint64_t base_batch;  // B
  std::uint64_t epochs;      // S
};

/// B = min(n, max(2, ceil(2 C sigma^2 / eps^2))),
/// S = max(1, ceil(2 C L delta / (sqrt(B) eps^2))).
StationaryParams stationary_params(std::uint64_t n, double smoothness, double delta,
                                   double epsilon, double sigma_sq,
                                   double constant = kBoundConstant);

/// Same, with delta = F(z0) - f_lower_bound.
StationaryParams stationary_params_for(const FiniteSumProblem& problem, const Vector& z0,
                                  double epsilon, double sigma_sq, double f_lower_bound,
                                  double constant = kBoundConstant);

struct DominatedParams {
  std::uint64_t base_batch;  // B
  std::uint64_t epochs;      // S
  std::uint64_t stages;      // U
};

/// B = min(n, max(2, ceil(4 C tau sigma^2 / eps))), S = max(1, ceil(2 C tau L / sqrt(B))),
/// U = max(1, ceil(log2(2 delta / eps))).
DominatedParams dominated_params(std::uint64_t n, double smoothness, double tau, double delta,
                                 double epsilon, double sigma_sq,
                                 double constant = kBoundConstant);

/// Requires the problem's gradient-dominance constant.
DominatedParams dominated_params_for(const FiniteSumProblem& problem, const Vector& z0,
                                 double epsilon, double sigma_sq, double f_lower_bound,
                                 double constant = kBoundConstant);

// --- baselines --------------------------------------------------------------

RunRecord gd(const Vector& z0, const GradientOracle& oracle, std::uint64_t steps, double eta,
             const RunOptions& options = {});

RunRecord sgd(const Vector& z0, const GradientOracle& oracle, std::uint64_t steps, double eta,
              std::size_t batch, const RngStream& rng, const RunOptions& options = {});

/// Each epoch: full snapshot gradient (n evaluations), then inner_len steps
///   x <- x - eta (grad F(x~) + grad f_I(x) - grad f_I(x~)).
RunRecord svrg(const Vector& z0, const GradientOracle& oracle, std::uint64_t epochs,
               std::uint64_t inner_len, double eta, std::size_t batch, const RngStream& rng,
               const RunOptions& options = {});

struct SvrgDefaults {
  std::uint64_t inner_len;
  std::size_t batch;
  double eta;
};
/// inner_len = n, batch = 1, eta = 1 / (3 L n^(2/3)).
SvrgDefaults svrg_defaults(std::size_t n, double smoothness);

struct ScsgOptions {
  /// Fixed inner length instead of a geometric draw (0 = geometric).
  std::uint64_t fixed_inner_len = 0;
};

/// Each epoch: anchor gradient over a sampled batch of base_batch indices,
/// an inner length N ~ Geometric with E[N] = base_batch / mini_batch, then
/// N SVRG-style steps with mini_batch-sized difference terms.
RunRecord scsg(const Vector& z0, const GradientOracle& oracle, std::uint64_t epochs,
               std::size_t base_batch, std::size_t mini_batch, double eta, const RngStream& rng,
               const RunOptions& options = {}, const ScsgOptions& scsg_options = {});

/// P(N = k) = (1 - g) g^k, k >= 0, with g chosen so that E[N] = mean.
std::uint64_t sample_geometric(RngStream& rng, double mean);

/// eta = 1 / (3 L (B/b)^(2/3)).
double scsg_default_eta(std::size_t base_batch, std::size_t mini_batch, double smoothness);

}  // namespace snvrg

#endif  // SNVRG_DRIVERS_HPP
