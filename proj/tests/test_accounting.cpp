#include <gtest/gtest.h>

#include <cmath>

#include "snvrg/accounting.hpp"
#include "test_support.hpp"

using namespace snvrg;
using snvrg::testing::random_toy;

namespace {

// Census by direct simulation: walk every t and refresh every level whose
// period divides t.
std::uint64_t simulated_census(const ParamSchedule& s, std::uint64_t n) {
  std::uint64_t total = std::min(s.base_batch, n);
  for (std::uint64_t t = 1; t < s.total_length(); ++t) {
    for (int l = 1; l <= s.depth; ++l) {
      std::uint64_t period = 1;
      for (int k = l + 1; k <= s.depth; ++k) period *= s.loop_length(k);
      if (t % period == 0) total += 2 * std::min(s.level_batch(l), n);
    }
  }
  return total;
}

EpochStats run_epoch(const ParamSchedule& s, std::size_t n, std::uint64_t seed) {
  ToyProblem p = random_toy(seed, n, 2);
  EvalCounter counter;
  GradientOracle oracle(p, counter);
  return one_epoch_snvrg(Vector::Ones(2), oracle, s, RngStream(seed)).stats;
}

}  // namespace

TEST(EpochCostFormula, FrozenValues) {
  const ComplexityReport r4 = epoch_cost_formula(schedule_from_base_batch(4, 1.0));
  EXPECT_EQ(r4.formula_count, 100u);
  EXPECT_EQ(r4.count_bound, 224u);
  EXPECT_EQ(r4.measured, 52u);
  const ComplexityReport r16 = epoch_cost_formula(schedule_from_base_batch(16, 1.0));
  EXPECT_EQ(r16.formula_count, 2512u);
  EXPECT_EQ(r16.count_bound, 7168u);
  EXPECT_EQ(r16.measured, 1312u);
  ASSERT_EQ(r16.per_level.size(), 2u);
  EXPECT_EQ(r16.per_level[0].refreshes, 1u);
  EXPECT_EQ(r16.per_level[1].refreshes, 3u);
  EXPECT_EQ(r16.per_level[0].cost, 1152u);
  EXPECT_EQ(r16.per_level[1].cost, 144u);
}

TEST(EpochCostFormula, LevelWorkIsGeometricInSix) {
  for (std::uint64_t b : {16ULL, 256ULL, 65536ULL}) {
    const ParamSchedule s = schedule_from_base_batch(b, 1.0);
    for (int l = 2; l <= s.depth; ++l) {
      EXPECT_EQ(s.level_batch(l) * s.loop_product(1, l),
                static_cast<std::uint64_t>(std::pow(6.0, s.depth - l + 1)) * b);
    }
    EXPECT_EQ(s.level_batch(1) * s.loop_length(1), 2 * static_cast<std::uint64_t>(std::pow(6.0, s.depth)) * b);
  }
}

TEST(EpochCostFormula, ChainHoldsForDyadicB) {
  for (std::uint64_t b : {4ULL, 16ULL, 256ULL, 65536ULL}) {
    const ComplexityReport r = epoch_cost_formula(schedule_from_base_batch(b, 1.0));
    EXPECT_LE(r.measured, r.formula_count);
    EXPECT_LE(r.formula_count, r.count_bound) << "B=" << b;
  }
}

TEST(CensusPrediction, MatchesSimulation) {
  for (std::uint64_t b : {4ULL, 16ULL, 100ULL, 256ULL}) {
    const ParamSchedule s = schedule_from_base_batch(b, 1.0);
    for (std::uint64_t n : {5ULL, 50ULL, 500ULL, 100000ULL}) {
      EXPECT_EQ(census_prediction(s, n), simulated_census(s, n)) << b << " " << n;
    }
  }
}

TEST(CensusCheck, PaperEpochs) {
  const ParamSchedule s4 = schedule_from_base_batch(4, 1.0);
  EXPECT_EQ(census_check(run_epoch(s4, 24, 1), s4, 24).measured, 52u);
  const ParamSchedule s16 = schedule_from_base_batch(16, 1.0);
  const ComplexityReport r = census_check(run_epoch(s16, 576, 2), s16, 576);
  EXPECT_EQ(r.measured, 1312u);
  EXPECT_EQ(r.formula_count, 2512u);
  EXPECT_EQ(r.count_bound, 7168u);
}

TEST(CensusCheck, FullBatchDegeneration) {
  const std::size_t n = 30;
  const ParamSchedule s = make_schedule(1.0, n, {2, 3, 2}, {n, n, n});
  const ComplexityReport r = census_check(run_epoch(s, n, 3), s, n);
  EXPECT_EQ(r.measured, n + 2 * n * ((2 - 1) + (6 - 1) + (12 - 1)));
}

TEST(CensusCheck, CappedBatches) {
  const ParamSchedule s = schedule_from_base_batch(16, 1.0);
  const ComplexityReport r = census_check(run_epoch(s, 100, 4), s, 100);
  EXPECT_EQ(r.measured, 16u + 2u * (100u * 1u + 24u * 3u));
}

TEST(CensusCheck, MismatchNamesTheLevel) {
  const ParamSchedule s = schedule_from_base_batch(16, 1.0);
  EpochStats stats = run_epoch(s, 576, 5);
  EpochStats bad_refresh = stats;
  bad_refresh.refreshes[1] += 1;
  try {
    census_check(bad_refresh, s, 576);
    FAIL();
  } catch (const AccountingError& e) {
    EXPECT_NE(std::string(e.what()).find("level 2"), std::string::npos) << e.what();
  }
  EpochStats bad_batch = stats;
  bad_batch.batch_used[0] = 7;
  try {
    census_check(bad_batch, s, 576);
    FAIL();
  } catch (const AccountingError& e) {
    EXPECT_NE(std::string(e.what()).find("level 1"), std::string::npos) << e.what();
  }
  EpochStats bad_count = stats;
  bad_count.evaluations += 1;
  EXPECT_THROW(census_check(bad_count, s, 576), AccountingError);
}

TEST(AnalysisConstants, FrozenValuesForB16) {
  const ParamSchedule s = schedule_from_base_batch(16, 1.0);
  const AnalysisConstants c = analysis_constants(s, 1.0);
  const double m = 6.0;
  EXPECT_NEAR(c.at(2, 2), m / 12.0, 1e-15);
  EXPECT_NEAR(c.at(1, 2), m / 144.0, 1e-15);
  EXPECT_NEAR(c.at(2, 1), 37.0 * m / 288.0, 1e-14);
  EXPECT_NEAR(c.at(2, 0), 56.5 * m / 288.0, 1e-14);
}

TEST(AnalysisConstants, TerminalValuesAndRecurrence) {
  for (std::uint64_t b : {4ULL, 16ULL, 256ULL, 65536ULL}) {
    for (double lip : {0.3, 1.0, 7.0}) {
      const ParamSchedule s = schedule_from_base_batch(b, lip);
      const AnalysisConstants c = analysis_constants(s, lip);
      const int k = s.depth;
      const double m = s.step_param;
      for (int lvl = 1; lvl <= k; ++lvl) {
        double tail = 1.0;
        for (int j = lvl; j <= k; ++j) tail *= static_cast<double>(s.loop_length(j));
        const double ts = static_cast<double>(s.loop_length(lvl));
        const double terminal = m / (std::pow(6.0, k - lvl + 1) * tail);
        EXPECT_NEAR(c.at(lvl, s.loop_length(lvl)), terminal, 1e-12 * terminal);
        const double inc = 3.0 * lip * lip / m * (tail / ts) / static_cast<double>(s.level_batch(lvl));
        for (std::uint64_t j = 0; j < s.loop_length(lvl); ++j) {
          EXPECT_NEAR(c.at(lvl, j), (1.0 + 1.0 / ts) * c.at(lvl, j + 1) + inc, 1e-12 * c.at(lvl, j));
          EXPECT_GT(c.at(lvl, j), c.at(lvl, j + 1));
        }
      }
    }
  }
}

TEST(AnalysisConstants, ClosedFormMatchesRecurrence) {
  for (std::uint64_t b : {4ULL, 16ULL, 256ULL, 65536ULL}) {
    const ParamSchedule s = schedule_from_base_batch(b, 2.0);
    const AnalysisConstants c = analysis_constants(s, 2.0);
    for (int lvl = 1; lvl <= s.depth; ++lvl) {
      for (std::uint64_t j = 0; j <= s.loop_length(lvl); ++j) {
        const double closed = analysis_constant_closed_form(s, 2.0, lvl, j);
        EXPECT_NEAR(closed, c.at(lvl, j), 1e-10 * std::abs(closed));
      }
    }
  }
}

TEST(AnalysisConstants, RefusesOutsidePreconditions) {
  const ParamSchedule practical = schedule_from_base_batch(16, 1.0, ScheduleMode::kPractical, {1.0, 1.0});
  try {
    analysis_constants(practical, 1.0);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("6L"), std::string::npos) << e.what();
  }
  const ParamSchedule thin = make_schedule(6.0, 16, {2, 2}, {576, 23}, ScheduleMode::kPaper);
  try {
    analysis_constants(thin, 1.0);
    FAIL();
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("B_2"), std::string::npos) << e.what();
  }
}

TEST(StepInequality, B16HandValue) {
  const ParamSchedule s = schedule_from_base_batch(16, 1.0);
  const InequalityReport r = step_inequality_check(analysis_constants(s, 1.0), s);
  EXPECT_TRUE(r.ok);
  bool seen = false;
  for (const auto& m : r.margins) {
    if (m.family == 5 && m.j == 0) {
      EXPECT_NEAR(m.lhs, 3.0 * 56.5 * 6.0 / 288.0, 1e-13);
      EXPECT_NEAR(m.lhs / 6.0, 0.5885416666666666, 1e-12);
      EXPECT_DOUBLE_EQ(m.rhs, 6.0);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(StepInequality, SingleLevelHasOnlyTheLastFamily) {
  const ParamSchedule s = schedule_from_base_batch(4, 1.0);
  const InequalityReport r = step_inequality_check(analysis_constants(s, 1.0), s);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.margins.size(), 3u);
  for (const auto& m : r.margins) EXPECT_EQ(m.family, 5);
}

TEST(StepInequality, HoldsForEveryPaperSchedule) {
  for (std::uint64_t b = 2; b <= 3000; b += (b < 300 ? 1 : 37)) {
    for (double lip : {0.01, 1.0, 50.0}) {
      const ParamSchedule s = schedule_from_base_batch(b, lip);
      const InequalityReport r = step_inequality_check(analysis_constants(s, lip), s);
      EXPECT_TRUE(r.ok) << "B=" << b << " L=" << lip;
      for (const auto& m : r.margins) EXPECT_GT(m.margin(), 0.0);
    }
  }
  for (std::uint64_t b : {256ULL, 65536ULL, 1ULL << 32}) {
    const ParamSchedule s = schedule_from_base_batch(b, 1.0);
    EXPECT_TRUE(step_inequality_check(analysis_constants(s, 1.0), s).ok) << b;
  }
}

TEST(StepInequality, ReportsViolations) {
  const ParamSchedule s = schedule_from_base_batch(16, 1.0);
  std::vector<std::vector<double>> table{{10.0, 10.0, 10.0}, {10.0, 10.0, 0.1}};
  const InequalityReport r = step_inequality_check(AnalysisConstants(table, 6.0), s);
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.violations.empty());
  EXPECT_EQ(r.violations.front().family, 4);
  EXPECT_EQ(r.violations.front().s, 2);
}

TEST(Table1, SnvrgDominatesOnGrid) {
  for (int i = 0; i < 20; ++i) {
    const double n = std::pow(10.0, 2.0 + 6.0 * i / 19.0);
    for (int j = 0; j < 20; ++j) {
      const double eps = std::pow(10.0, -4.0 + 3.0 * j / 19.0);
      const auto c = table1_curves(n, eps);
      ASSERT_EQ(c.size(), 5u);
      EXPECT_EQ(c[3].algorithm, "scsg");
      EXPECT_EQ(c[4].algorithm, "snvrg");
      EXPECT_LE(c[4].complexity, c[3].complexity);
      EXPECT_LE(c[3].complexity, c[2].complexity);
      EXPECT_LE(c[4].pl_complexity, c[3].pl_complexity);
    }
  }
}

TEST(Table1, RatioAndCrossover) {
  const auto c = table1_curves(1e8, 1e-2);
  EXPECT_NEAR(c[4].complexity / c[3].complexity, std::pow(10.0, -2.0 / 3.0), 1e-12);
  // Both branches of the SNVRG minimum meet at n = eps^-2.
  const double eps = 1e-3;
  const auto at = table1_curves(1.0 / (eps * eps), eps);
  EXPECT_NEAR(at[4].complexity, std::pow(eps, -3.0), 1e-6 * std::pow(eps, -3.0));
  EXPECT_LT(table1_curves(0.5 / (eps * eps), eps)[4].complexity, std::pow(eps, -3.0));
  EXPECT_DOUBLE_EQ(table1_curves(2.0 / (eps * eps), eps)[4].complexity, std::pow(eps, -3.0));
}

TEST(Table1, BaselineShapes) {
  const auto c = table1_curves(1e4, 1e-2, 3.0, 2.0);
  EXPECT_DOUBLE_EQ(c[0].complexity, 2.0 * 1e4 / 1e-4);
  EXPECT_DOUBLE_EQ(c[1].complexity, 2.0 / 1e-8);
  EXPECT_DOUBLE_EQ(c[0].pl_complexity, 2.0 * 3.0 * 1e4);
  EXPECT_THROW(table1_curves(0.5, 0.1), InputError);
  EXPECT_THROW(table1_curves(10.0, 0.0), InputError);
}
