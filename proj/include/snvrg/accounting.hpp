#ifndef SNVRG_ACCOUNTING_HPP
#define SNVRG_ACCOUNTING_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "snvrg/nested_vr.hpp"

namespace snvrg {

class AccountingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LevelCost {
  int level;
  std::uint64_t refreshes;  // samples of g^(l) per epoch
  std::uint64_t batch;      // batch drawn per refresh
  std::uint64_t cost;       // 2 * refreshes * batch
};

/// Gradient-evaluation accounting for one nested epoch.
///
/// `formula_count` counts B + 2 sum_l B_l prod_{j<=l} T_j, i.e. a refresh of
/// every level at every loop entry including t = 0. `measured` is what the
/// epoch actually spends: levels start at zero, so each level refreshes
/// prod_{j<=l} T_j - 1 times. `count_bound` is floor(7 B (log2 B)^3).
struct ComplexityReport {
  std::uint64_t measured = 0;
  std::uint64_t formula_count = 0;
  std::uint64_t count_bound = 0;
  std::vector<LevelCost> per_level;
};

/// Formula fields only; `measured` holds the uncapped census prediction.
ComplexityReport epoch_cost_formula(const ParamSchedule& schedule);

/// Census prediction with every batch capped at n.
std::uint64_t census_prediction(const ParamSchedule& schedule, std::uint64_t n);

/// Checks a finished epoch against the census. Throws AccountingError naming
/// the first level whose refresh count or batch disagrees, or when the
/// measured <= formula_count <= count_bound chain fails for an uncapped paper-mode
/// epoch.
ComplexityReport census_check(const EpochStats& stats, const ParamSchedule& schedule,
                              std::uint64_t n);

/// c_j^(s) for 1 <= s <= K and 0 <= j <= T_s, in units where M and L are
/// the schedule's values.
class AnalysisConstants {
 public:
  AnalysisConstants(std::vector<std::vector<double>> table, double step_param)
      : table_(std::move(table)), step_param_(step_param) {}

  int depth() const { return static_cast<int>(table_.size()); }
  double at(int s, std::uint64_t j) const { return table_.at(static_cast<std::size_t>(s - 1)).at(j); }
  std::uint64_t length(int s) const { return table_.at(static_cast<std::size_t>(s - 1)).size() - 1; }
  double step_param() const { return step_param_; }

 private:
  std::vector<std::vector<double>> table_;
  double step_param_;
};

class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Backward recurrence from the terminal value
///   c_{T_s} = M / (6^(K-s+1) prod_{l=s..K} T_l),
///   c_j = (1 + 1/T_s) c_{j+1} + (3 L^2 / M) prod_{l=s+1..K} T_l / B_s.
/// Refuses schedules outside M >= 6L and the level-batch lower bounds.
AnalysisConstants analysis_constants(const ParamSchedule& schedule, double smoothness);

/// Closed form of the same series:
///   c_j = (1 + 1/T)^(T-j) c_T + ((1 + 1/T)^(T-j) - 1) T (3 L^2 / M) prod / B_s.
double analysis_constant_closed_form(const ParamSchedule& schedule, double smoothness, int s,
                                     std::uint64_t j);

struct InequalityMargin {
  int family;  // 4: (1 + T_{s-1}) c_j^(s-1) < c_{T_s}^(s);  5: (1 + T_K) c_j^(K) < M
  int s;
  std::uint64_t j;
  double lhs;
  double rhs;
  double margin() const { return rhs - lhs; }
};

struct InequalityReport {
  bool ok = true;
  std::vector<InequalityMargin> margins;
  std::vector<InequalityMargin> violations;
};

InequalityReport step_inequality_check(const AnalysisConstants& constants, const ParamSchedule& schedule);

// --- theoretical complexity curves ------------------------------------------

struct CurveValue {
  std::string algorithm;
  double n;
  double epsilon;
  double complexity;     // stationary-point column, constants and logs dropped
  double pl_complexity;  // gradient-dominated column
  std::string log_factor;
};

/// GD, SGD, SVRG, SCSG, SNVRG at one (n, eps, tau) point; every value is
/// multiplied by `scale`.
std::vector<CurveValue> table1_curves(double n, double epsilon, double tau = 1.0,
                                      double scale = 1.0);

}  // namespace snvrg

#endif  // SNVRG_ACCOUNTING_HPP
