#ifndef SNVRG_NESTED_VR_HPP
#define SNVRG_NESTED_VR_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "snvrg/objectives.hpp"
#include "snvrg/sampling.hpp"

namespace snvrg {

enum class ScheduleMode { kPaper, kPractical };

/// Loop/batch parameters of one nested epoch.
///
/// Levels are 1-based in the math (T_1..T_K, B_1..B_K) and stored 0-based
/// here: loop_lengths[l - 1] == T_l.
struct ParamSchedule {
  int depth = 1;                            // K
  double step_param = 1.0;                  // M; the step is 1 / (10 M)
  std::uint64_t base_batch = 1;             // B
  std::vector<std::uint64_t> loop_lengths;  // T_1..T_K
  std::vector<std::uint64_t> level_batches; // B_1..B_K
  ScheduleMode mode = ScheduleMode::kPaper;

  double step() const { return 1.0 / (10.0 * step_param); }
  std::uint64_t loop_length(int level) const { return loop_lengths.at(static_cast<std::size_t>(level - 1)); }
  std::uint64_t level_batch(int level) const { return level_batches.at(static_cast<std::size_t>(level - 1)); }
  /// prod_{j=1..K} T_j
  std::uint64_t total_length() const;
  /// prod_{k=first..last} T_k, 1 when first > last.
  std::uint64_t loop_product(int first, int last) const;
  /// prod_{k=l+1..K} T_k: the refresh period of level l.
  std::uint64_t period(int level) const { return loop_product(level + 1, depth); }

  void validate() const;
};

/// Multipliers applied in practical mode on top of the paper formulas.
struct PracticalScaling {
  double step_multiplier = 6.0;   // M = step_multiplier * L
  double batch_multiplier = 1.0;  // B_l scaled, then ceilinged, floor 1
};

/// Paper mode: K = max(1, floor(log2 log2 B)), M = 6L, T_1 = 2,
/// T_l = 2^(2^(l-2)), B_1 = 6^K B, B_l = ceil(6^(K-l+1) B / 2^(2^(l-1))).
/// For B < 4 the batches are raised to 6^(K-l+1) (prod_{s>=l} T_s)^2.
ParamSchedule schedule_from_base_batch(std::uint64_t base_batch, double smoothness,
                                       ScheduleMode mode = ScheduleMode::kPaper,
                                       PracticalScaling scaling = {});

ParamSchedule make_schedule(double step_param, std::uint64_t base_batch,
                            std::vector<std::uint64_t> loop_lengths,
                            std::vector<std::uint64_t> level_batches,
                            ScheduleMode mode = ScheduleMode::kPractical);

/// Step-size and batch preconditions under which the single-epoch bound
/// is proved: M >= 6L and B_l >= 6^(K-l+1) (prod_{s=l..K} T_s)^2.
bool satisfies_epoch_bound_preconditions(const ParamSchedule& schedule, double smoothness,
                                         std::string* failure = nullptr);

/// t^l = floor(t / P) * P with P = prod_{k=l+1..K} T_k.
std::uint64_t reference_index(std::uint64_t t, int level, const ParamSchedule& schedule);

/// Least r with t == 0 (mod prod_{l=r+1..K} T_l); levels r..K refresh at t.
int update_level(std::uint64_t t, const ParamSchedule& schedule);

struct NestedState {
  std::uint64_t t = 0;
  Vector x;
  std::vector<Vector> x_ref;  // K + 1 reference points
  std::vector<Vector> g_ref;  // K + 1 reference gradients
};

/// Levels r..K move to x_t; levels below r keep their point.
void update_reference_points(NestedState& state, const Vector& x_t, int r);

/// Redraws g_ref[l] for l = r..K from fresh index sets of size min(B_l, n).
/// `step_rng` is the stream for the current iteration; level l draws from
/// its child(l).
void update_reference_gradients(NestedState& state, const GradientOracle& oracle,
                                const ParamSchedule& schedule, const RngStream& step_rng,
                                int r);

/// v_t = sum_{l=0..K} g_ref[l].
Vector semi_stochastic_gradient(const NestedState& state);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::uint64_t iteration, const std::string& where);
  std::uint64_t iteration() const { return iteration_; }

 private:
  std::uint64_t iteration_;
};

struct EpochStats {
  std::uint64_t evaluations = 0;           // counter delta over the epoch
  std::vector<std::uint64_t> refreshes;    // per level 1..K (index l - 1)
  std::vector<std::uint64_t> batch_used;   // min(B_l, n) per level
  std::uint64_t base_batch_used = 0;       // min(B, n)
  std::uint64_t output_index = 0;          // t of x_out
};

struct EpochResult {
  Vector x_out;
  Vector x_end;
  EpochStats stats;
};

/// Per-iteration view handed to observers, after v_t is formed and before
/// the update x_{t+1} = x_t - v_t / (10 M).
struct StepView {
  std::uint64_t t;
  const NestedState& state;
  const Vector& direction;
};
using StepObserver = std::function<void(const StepView&)>;

/// Stream labels under an epoch stream. Shared by every implementation that
/// must reproduce the same sample sets.
inline constexpr std::uint64_t kSampleStream = 0x53414D50;  // "SAMP"
inline constexpr std::uint64_t kOutputStream = 0x4F555450;  // "OUTP"

/// One epoch of nested variance-reduced descent, iteration-indexed form.
EpochResult one_epoch_snvrg(const Vector& x0, const GradientOracle& oracle,
                            const ParamSchedule& schedule, const RngStream& rng,
                            const StepObserver& observer = {});

/// Same epoch written as K nested loops; consumes identical randomness and
/// produces identical iterates and counts.
EpochResult one_epoch_snvrg_nested(const Vector& x0, const GradientOracle& oracle,
                                   const ParamSchedule& schedule, const RngStream& rng,
                                   const StepObserver& observer = {});

}  // namespace snvrg

#endif  // SNVRG_NESTED_VR_HPP
