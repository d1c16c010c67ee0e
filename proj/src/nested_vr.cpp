#include "snvrg/nested_vr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace snvrg {
namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw InputError("schedule: batch size overflows 64 bits");
  }
  return a * b;
}

std::uint64_t checked_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

int floor_log2(std::uint64_t v) { return static_cast<int>(std::bit_width(v)) - 1; }

// 2^(2^e)
std::uint64_t tower(int e) { return std::uint64_t{1} << (std::uint64_t{1} << e); }

void check_finite(const Vector& x, std::uint64_t iteration) {
  if (!x.allFinite()) throw DivergenceError(iteration, "nested epoch");
}

}  // namespace

std::uint64_t ParamSchedule::total_length() const { return loop_product(1, depth); }

std::uint64_t ParamSchedule::loop_product(int first, int last) const {
  std::uint64_t out = 1;
  for (int k = first; k <= last; ++k) out = checked_mul(out, loop_length(k));
  return out;
}

void ParamSchedule::validate() const {
  if (depth < 1) throw InputError("schedule: depth K must be >= 1");
  if (loop_lengths.size() != static_cast<std::size_t>(depth) ||
      level_batches.size() != static_cast<std::size_t>(depth)) {
    throw InputError("schedule: need exactly K loop lengths and K level batches");
  }
  if (!(step_param > 0.0) || !std::isfinite(step_param)) {
    throw InputError("schedule: step parameter M must be positive");
  }
  if (base_batch == 0) throw InputError("schedule: base batch must be positive");
  for (int l = 1; l <= depth; ++l) {
    if (loop_length(l) == 0) throw InputError("schedule: T_" + std::to_string(l) + " must be positive");
    if (level_batch(l) == 0) throw InputError("schedule: B_" + std::to_string(l) + " must be positive");
  }
}

ParamSchedule schedule_from_base_batch(std::uint64_t base_batch, double smoothness,
                                       ScheduleMode mode, PracticalScaling scaling) {
  if (base_batch < 2) throw InputError("schedule: base batch B must be >= 2");
  if (!(smoothness > 0.0)) throw InputError("schedule: smoothness L must be positive");

  ParamSchedule s;
  s.mode = mode;
  s.base_batch = base_batch;
  s.depth = std::max(1, floor_log2(static_cast<std::uint64_t>(floor_log2(base_batch))));
  const int k = s.depth;
  s.loop_lengths.resize(static_cast<std::size_t>(k));
  s.level_batches.resize(static_cast<std::size_t>(k));
  s.loop_lengths[0] = 2;
  s.level_batches[0] = checked_mul(checked_pow(6, k), base_batch);
  for (int l = 2; l <= k; ++l) {
    s.loop_lengths[static_cast<std::size_t>(l - 1)] = tower(l - 2);
    const std::uint64_t num = checked_mul(checked_pow(6, k - l + 1), base_batch);
    const std::uint64_t den = tower(l - 1);
    s.level_batches[static_cast<std::size_t>(l - 1)] = (num + den - 1) / den;
  }

  if (mode == ScheduleMode::kPaper) {
    s.step_param = 6.0 * smoothness;
    // B < 4 still gets K = 1, where 6B falls short of 6 T_1^2; lift to the bound.
    for (int l = 1; l <= k; ++l) {
      const std::uint64_t tail = s.loop_product(l, k);
      auto& b = s.level_batches[static_cast<std::size_t>(l - 1)];
      b = std::max(b, checked_mul(checked_pow(6, k - l + 1), checked_mul(tail, tail)));
    }
  } else {
    if (!(scaling.step_multiplier > 0.0) || !(scaling.batch_multiplier > 0.0)) {
      throw InputError("schedule: practical multipliers must be positive");
    }
    s.step_param = scaling.step_multiplier * smoothness;
    for (auto& b : s.level_batches) {
      const double scaled = std::ceil(scaling.batch_multiplier * static_cast<double>(b));
      b = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(scaled));
    }
  }
  s.validate();
  return s;
}

ParamSchedule make_schedule(double step_param, std::uint64_t base_batch,
                            std::vector<std::uint64_t> loop_lengths,
                            std::vector<std::uint64_t> level_batches, ScheduleMode mode) {
  ParamSchedule s;
  s.depth = static_cast<int>(loop_lengths.size());
  s.step_param = step_param;
  s.base_batch = base_batch;
  s.loop_lengths = std::move(loop_lengths);
  s.level_batches = std::move(level_batches);
  s.mode = mode;
  s.validate();
  return s;
}

bool satisfies_epoch_bound_preconditions(const ParamSchedule& schedule, double smoothness,
                                         std::string* failure) {
  auto fail = [&](std::string why) {
    if (failure) *failure = std::move(why);
    return false;
  };
  if (schedule.step_param < 6.0 * smoothness) {
    return fail("M = " + std::to_string(schedule.step_param) + " < 6L = " +
                std::to_string(6.0 * smoothness));
  }
  const int k = schedule.depth;
  for (int l = 1; l <= k; ++l) {
    const double tail = static_cast<double>(schedule.loop_product(l, k));
    const double need = std::pow(6.0, k - l + 1) * tail * tail;
    if (static_cast<double>(schedule.level_batch(l)) < need) {
      return fail("B_" + std::to_string(l) + " = " + std::to_string(schedule.level_batch(l)) +
                  " < 6^(K-l+1) (prod T)^2 = " + std::to_string(need));
    }
  }
  return true;
}

std::uint64_t reference_index(std::uint64_t t, int level, const ParamSchedule& schedule) {
  if (level < 0 || level > schedule.depth) throw InputError("reference_index: level out of range");
  if (t >= schedule.total_length()) throw InputError("reference_index: t out of range");
  const std::uint64_t p = schedule.period(level);
  return (t / p) * p;
}

int update_level(std::uint64_t t, const ParamSchedule& schedule) {
  if (t == 0 || t >= schedule.total_length()) throw InputError("update_level: t out of range");
  for (int j = 0; j <= schedule.depth; ++j) {
    if (t % schedule.period(j) == 0) return j;
  }
  return schedule.depth;  // unreachable: period(K) == 1
}

void update_reference_points(NestedState& state, const Vector& x_t, int r) {
  const int k = static_cast<int>(state.x_ref.size()) - 1;
  if (r < 0 || r > k) throw InputError("update_reference_points: r out of range");
  for (int l = r; l <= k; ++l) state.x_ref[static_cast<std::size_t>(l)] = x_t;
}

void update_reference_gradients(NestedState& state, const GradientOracle& oracle,
                                const ParamSchedule& schedule, const RngStream& step_rng,
                                int r) {
  const int k = schedule.depth;
  if (r < 1 || r > k) throw InputError("update_reference_gradients: r out of range");
  const std::size_t n = oracle.problem().size();
  for (int l = r; l <= k; ++l) {
    const auto lu = static_cast<std::size_t>(l);
    RngStream level_rng = step_rng.child(static_cast<std::uint64_t>(l));
    const auto m = static_cast<std::size_t>(std::min<std::uint64_t>(schedule.level_batch(l), n));
    const IndexSet batch = sample_without_replacement(level_rng, n, m);
    state.g_ref[lu] = oracle.batch_gradient_difference(batch, state.x_ref[lu], state.x_ref[lu - 1]);
  }
}

Vector semi_stochastic_gradient(const NestedState& state) {
  Vector v = state.g_ref.front();
  for (std::size_t l = 1; l < state.g_ref.size(); ++l) v += state.g_ref[l];
  return v;
}

DivergenceError::DivergenceError(std::uint64_t iteration, const std::string& where)
    : std::runtime_error("divergence: non-finite iterate at iteration " + std::to_string(iteration) +
                         " (" + where + ")"),
      iteration_(iteration) {}

// ---------------------------------------------------------------------------

namespace {

struct EpochSetup {
  std::size_t n;
  std::uint64_t total;
  std::uint64_t output_index;
  std::uint64_t counter_start;
  RngStream samples;
  NestedState state;
  EpochStats stats;
};

EpochSetup begin_epoch(const Vector& x0, const GradientOracle& oracle,
                       const ParamSchedule& schedule, const RngStream& rng) {
  schedule.validate();
  oracle.problem().check_point(x0);
  const std::size_t n = oracle.problem().size();
  const int k = schedule.depth;

  EpochSetup e{n, schedule.total_length(), 0, oracle.counter().counted(),
               rng.child(kSampleStream), {}, {}};
  RngStream out_rng = rng.child(kOutputStream);
  e.output_index = out_rng.uniform_below(e.total);

  e.state.t = 0;
  e.state.x = x0;
  e.state.x_ref.assign(static_cast<std::size_t>(k + 1), x0);
  e.state.g_ref.assign(static_cast<std::size_t>(k + 1), Vector::Zero(x0.size()));

  e.stats.refreshes.assign(static_cast<std::size_t>(k), 0);
  e.stats.batch_used.resize(static_cast<std::size_t>(k));
  for (int l = 1; l <= k; ++l) {
    e.stats.batch_used[static_cast<std::size_t>(l - 1)] = std::min<std::uint64_t>(schedule.level_batch(l), n);
  }
  e.stats.base_batch_used = std::min<std::uint64_t>(schedule.base_batch, n);
  e.stats.output_index = e.output_index;

  // Anchor gradient at x_0 from the level-0 stream of iteration 0.
  RngStream anchor_rng = e.samples.child(std::uint64_t{0}).child(std::uint64_t{0});
  const IndexSet anchor = sample_without_replacement(anchor_rng, n, e.stats.base_batch_used);
  e.state.g_ref[0] = oracle.batch_gradient(anchor, x0);
  return e;
}

}  // namespace

EpochResult one_epoch_snvrg(const Vector& x0, const GradientOracle& oracle,
                            const ParamSchedule& schedule, const RngStream& rng,
                            const StepObserver& observer) {
  EpochSetup e = begin_epoch(x0, oracle, schedule, rng);
  NestedState& state = e.state;
  const double step = schedule.step();
  EpochResult result;

  for (std::uint64_t t = 0; t < e.total; ++t) {
    state.t = t;
    if (t >= 1) {
      const int r = update_level(t, schedule);
      update_reference_points(state, state.x, r);
      update_reference_gradients(state, oracle, schedule, e.samples.child(t), r);
      for (int l = r; l <= schedule.depth; ++l) ++e.stats.refreshes[static_cast<std::size_t>(l - 1)];
    }
    const Vector v = semi_stochastic_gradient(state);
    if (observer) observer(StepView{t, state, v});
    if (t == e.output_index) result.x_out = state.x;
    state.x.noalias() -= step * v;
    check_finite(state.x, t + 1);
  }
  state.t = e.total;
  result.x_end = state.x;
  e.stats.evaluations = oracle.counter().counted() - e.counter_start;
  result.stats = std::move(e.stats);
  return result;
}

namespace {

struct NestedRun {
  const GradientOracle& oracle;
  const ParamSchedule& schedule;
  const StepObserver& observer;
  EpochSetup& e;
  EpochResult& result;
  double step;
  std::uint64_t t = 0;

  // Loop over t_l at `level`; inner levels run to completion per iteration.
  void loop(int level) {
    NestedState& state = e.state;
    const auto lu = static_cast<std::size_t>(level);
    const std::size_t n = e.n;
    for (std::uint64_t t_l = 0; t_l < schedule.loop_length(level); ++t_l) {
      state.x_ref[lu] = state.x;
      if (t != 0) {
        // Entering iteration t_l of this loop: fresh sample for g^(l).
        RngStream level_rng = e.samples.child(t).child(static_cast<std::uint64_t>(level));
        const auto m = static_cast<std::size_t>(std::min<std::uint64_t>(schedule.level_batch(level), n));
        const IndexSet batch = sample_without_replacement(level_rng, n, m);
        state.g_ref[lu] = oracle.batch_gradient_difference(batch, state.x_ref[lu], state.x_ref[lu - 1]);
        ++e.stats.refreshes[lu - 1];
      }
      if (level < schedule.depth) {
        loop(level + 1);
        continue;
      }
      state.t = t;
      Vector v = state.g_ref[0];
      for (std::size_t j = 1; j < state.g_ref.size(); ++j) v += state.g_ref[j];
      if (observer) observer(StepView{t, state, v});
      if (t == e.output_index) result.x_out = state.x;
      state.x.noalias() -= step * v;
      check_finite(state.x, t + 1);
      ++t;
    }
  }
};

}  // namespace

EpochResult one_epoch_snvrg_nested(const Vector& x0, const GradientOracle& oracle,
                                   const ParamSchedule& schedule, const RngStream& rng,
                                   const StepObserver& observer) {
  EpochSetup e = begin_epoch(x0, oracle, schedule, rng);
  EpochResult result;
  NestedRun run{oracle, schedule, observer, e, result, schedule.step()};
  run.loop(1);
  e.state.t = run.t;
  result.x_end = e.state.x;
  e.stats.evaluations = oracle.counter().counted() - e.counter_start;
  result.stats = std::move(e.stats);
  return result;
}

}  // namespace snvrg
