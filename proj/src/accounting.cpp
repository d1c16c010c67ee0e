#include "snvrg/accounting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace snvrg {
namespace {

double log2_exact(std::uint64_t v) {
  if (std::has_single_bit(v)) return static_cast<double>(std::bit_width(v) - 1);
  return std::log2(static_cast<double>(v));
}

}  // namespace

ComplexityReport epoch_cost_formula(const ParamSchedule& schedule) {
  schedule.validate();
  ComplexityReport report;
  const std::uint64_t b = schedule.base_batch;
  std::uint64_t formula = b;
  std::uint64_t measured = b;
  for (int l = 1; l <= schedule.depth; ++l) {
    const std::uint64_t loops = schedule.loop_product(1, l);
    const std::uint64_t bl = schedule.level_batch(l);
    formula += 2 * bl * loops;
    measured += 2 * bl * (loops - 1);
    report.per_level.push_back({l, loops - 1, bl, 2 * bl * (loops - 1)});
  }
  report.measured = measured;
  report.formula_count = formula;
  const double lg = log2_exact(b);
  report.count_bound = static_cast<std::uint64_t>(std::floor(7.0 * static_cast<double>(b) * lg * lg * lg));
  return report;
}

std::uint64_t census_prediction(const ParamSchedule& schedule, std::uint64_t n) {
  std::uint64_t total = std::min(schedule.base_batch, n);
  for (int l = 1; l <= schedule.depth; ++l) {
    total += 2 * std::min(schedule.level_batch(l), n) * (schedule.loop_product(1, l) - 1);
  }
  return total;
}

ComplexityReport census_check(const EpochStats& stats, const ParamSchedule& schedule,
                              std::uint64_t n) {
  ComplexityReport report = epoch_cost_formula(schedule);
  const int k = schedule.depth;
  if (stats.refreshes.size() != static_cast<std::size_t>(k)) {
    throw AccountingError("census: epoch stats carry " + std::to_string(stats.refreshes.size()) +
                          " levels, schedule has " + std::to_string(k));
  }
  if (stats.base_batch_used != std::min(schedule.base_batch, n)) {
    throw AccountingError("census: level 0 anchor batch " + std::to_string(stats.base_batch_used) +
                          " != min(B, n)");
  }
  for (int l = 1; l <= k; ++l) {
    const auto idx = static_cast<std::size_t>(l - 1);
    const std::uint64_t want_refresh = schedule.loop_product(1, l) - 1;
    const std::uint64_t want_batch = std::min(schedule.level_batch(l), n);
    if (stats.refreshes[idx] != want_refresh) {
      throw AccountingError("census: level " + std::to_string(l) + " refreshed " +
                            std::to_string(stats.refreshes[idx]) + " times, expected " +
                            std::to_string(want_refresh));
    }
    if (stats.batch_used[idx] != want_batch) {
      throw AccountingError("census: level " + std::to_string(l) + " batch " +
                            std::to_string(stats.batch_used[idx]) + ", expected " +
                            std::to_string(want_batch));
    }
    report.per_level[idx].batch = want_batch;
    report.per_level[idx].cost = 2 * want_batch * want_refresh;
  }
  const std::uint64_t predicted = census_prediction(schedule, n);
  if (stats.evaluations != predicted) {
    throw AccountingError("census: counter read " + std::to_string(stats.evaluations) +
                          ", census predicts " + std::to_string(predicted));
  }
  report.measured = stats.evaluations;

  const std::uint64_t widest =
      std::max(schedule.base_batch, *std::max_element(schedule.level_batches.begin(), schedule.level_batches.end()));
  if (schedule.mode == ScheduleMode::kPaper && n >= widest) {
    if (report.measured > report.formula_count) {
      throw AccountingError("census: measured " + std::to_string(report.measured) +
                            " exceeds the per-loop formula " + std::to_string(report.formula_count));
    }
    if (report.formula_count > report.count_bound) {
      throw AccountingError("census: formula " + std::to_string(report.formula_count) +
                            " exceeds 7B log^3 B = " + std::to_string(report.count_bound));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------

AnalysisConstants analysis_constants(const ParamSchedule& schedule, double smoothness) {
  schedule.validate();
  std::string why;
  if (!satisfies_epoch_bound_preconditions(schedule, smoothness, &why)) {
    throw PreconditionError("analysis constants: " + why);
  }
  const int k = schedule.depth;
  const double m = schedule.step_param;
  const double drift = 3.0 * smoothness * smoothness / m;
  std::vector<std::vector<double>> table(static_cast<std::size_t>(k));
  for (int s = 1; s <= k; ++s) {
    const std::uint64_t ts = schedule.loop_length(s);
    auto& row = table[static_cast<std::size_t>(s - 1)];
    row.assign(ts + 1, 0.0);
    row[ts] = m / (std::pow(6.0, k - s + 1) * static_cast<double>(schedule.loop_product(s, k)));
    const double increment = drift * static_cast<double>(schedule.loop_product(s + 1, k)) /
                             static_cast<double>(schedule.level_batch(s));
    const double growth = 1.0 + 1.0 / static_cast<double>(ts);
    for (std::uint64_t j = ts; j-- > 0;) row[j] = growth * row[j + 1] + increment;
  }
  return AnalysisConstants(std::move(table), m);
}

double analysis_constant_closed_form(const ParamSchedule& schedule, double smoothness, int s,
                                     std::uint64_t j) {
  const int k = schedule.depth;
  const double m = schedule.step_param;
  const double ts = static_cast<double>(schedule.loop_length(s));
  const double terminal = m / (std::pow(6.0, k - s + 1) * static_cast<double>(schedule.loop_product(s, k)));
  const double increment = 3.0 * smoothness * smoothness / m *
                           static_cast<double>(schedule.loop_product(s + 1, k)) /
                           static_cast<double>(schedule.level_batch(s));
  const double power = std::pow(1.0 + 1.0 / ts, ts - static_cast<double>(j));
  return power * terminal + (power - 1.0) * ts * increment;
}

InequalityReport step_inequality_check(const AnalysisConstants& constants, const ParamSchedule& schedule) {
  InequalityReport report;
  const int k = schedule.depth;
  auto record = [&](InequalityMargin m) {
    if (!(m.lhs < m.rhs)) {
      report.ok = false;
      report.violations.push_back(m);
    }
    report.margins.push_back(m);
  };
  for (int s = 2; s <= k; ++s) {
    const double prev_len = static_cast<double>(schedule.loop_length(s - 1));
    const double rhs = constants.at(s, constants.length(s));
    for (std::uint64_t j = 0; j <= constants.length(s - 1); ++j) {
      record({4, s, j, (1.0 + prev_len) * constants.at(s - 1, j), rhs});
    }
  }
  const double last_len = static_cast<double>(schedule.loop_length(k));
  for (std::uint64_t j = 0; j <= constants.length(k); ++j) {
    record({5, k, j, (1.0 + last_len) * constants.at(k, j), constants.step_param()});
  }
  return report;
}

// ---------------------------------------------------------------------------

std::vector<CurveValue> table1_curves(double n, double epsilon, double tau, double scale) {
  if (!(n >= 1.0)) throw InputError("table1_curves: n must be >= 1");
  if (!(epsilon > 0.0)) throw InputError("table1_curves: epsilon must be positive");
  const double e2 = epsilon * epsilon;
  const double reach = std::min(n, tau / epsilon);  // n ∧ tau/eps
  std::vector<CurveValue> out;
  out.push_back({"gd", n, epsilon, scale * n / e2, scale * tau * n, "log(1/eps) in pl column"});
  out.push_back({"sgd", n, epsilon, scale / (e2 * e2), scale / (e2 * e2), ""});
  out.push_back({"svrg", n, epsilon, scale * std::pow(n, 2.0 / 3.0) / e2,
                 scale * (n + tau * std::pow(n, 2.0 / 3.0)), "log(1/eps) in pl column"});
  out.push_back({"scsg", n, epsilon,
                 scale * std::min(std::pow(epsilon, -10.0 / 3.0), std::pow(n, 2.0 / 3.0) / e2),
                 scale * (reach + tau * std::pow(reach, 2.0 / 3.0)), "log(1/eps) in pl column"});
  out.push_back({"snvrg", n, epsilon,
                 scale * std::min(std::pow(epsilon, -3.0), std::sqrt(n) / e2),
                 scale * (reach + tau * std::sqrt(reach)), "log^3 B; log(1/eps) in pl column"});
  return out;
}

}  // namespace snvrg
