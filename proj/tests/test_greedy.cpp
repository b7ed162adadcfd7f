#include <cran/greedy.hpp>
#include <cran/persc.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "random_instances.hpp"

using namespace cran;
using cran::testing::random_sc_instance;

namespace {

// Per-user comparison of the greedy set against exhaustive enumeration.
struct Comparison {
  GreedyResult greedy;
  FadChoice exhaustive;
};

Comparison compare_user(const cran::testing::ScInstance& in, std::size_t k) {
  const FadSubsetEvaluator eval(0, k, in.dual, in.gains, in.params);
  return {greedy_fad_selection(eval), exhaustive_fad_for_user(eval)};
}

}  // namespace

TEST(Greedy, AllSingletonsUnprofitableGivesEmptySet) {
  std::mt19937_64 rng(41);
  auto in = random_sc_instance(rng, 4, 1);
  for (std::size_t m = 0; m < 4; ++m) in.dual.lambda[m] = 1e9 * in.params.fronthaul_capacity[m];
  const GreedyResult r = greedy_fad_selection(0, 0, in.dual, in.gains, in.params);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.power, 0.0);
  EXPECT_EQ(r.subset, std::vector<bool>(4, false));
  EXPECT_EQ(r.candidate_evaluations, 4u);
  ASSERT_EQ(r.trace.iterations.size(), 1u);
  EXPECT_FALSE(r.trace.iterations[0].accepted);
}

TEST(Greedy, MatchesExhaustiveForAtMostTwoRrhs) {
  std::mt19937_64 rng(42);
  for (int draw = 0; draw < 1000; ++draw) {
    auto in = random_sc_instance(rng, 1 + draw % 2, 1 + (draw / 2) % 3);
    for (std::size_t k = 0; k < in.params.num_users; ++k) {
      const Comparison c = compare_user(in, k);
      ASSERT_EQ(c.greedy.value, c.exhaustive.value) << "draw " << draw;
      ASSERT_EQ(c.greedy.subset, c.exhaustive.subset) << "draw " << draw;
    }
    const auto g = solve_sc(0, in.dual, in.gains, in.params, FadSearch::greedy);
    const auto e = solve_sc(0, in.dual, in.gains, in.params, FadSearch::exhaustive);
    ASSERT_EQ(g.lagrangian_value, e.lagrangian_value) << "draw " << draw;
  }
}

// Two identical RRHs whose singleton gain is negative but whose pair gains:
// greedy stops at the empty set while the pair is profitable. This is the
// one M = 2 case where greedy can lose to enumeration.
TEST(Greedy, PairOnlyProfitableCaseIsMissed) {
  const double scb = 312500.0, noise = 4.9e-15, gain = 1e-10;
  const int bits = 10;
  SystemParams p = SystemParams::uniform(2, 1, 1, scb, bits, 1e9, 1e3, noise);
  ChannelGains g(2, 1, 1, gain);
  const double a = gain / noise;
  const double theta = std::ldexp(1.0, 2 * bits) / 3.0;
  // Slope of the rate at zero power for one link; twice that for the pair.
  const double slope = scb / ln2 * a * theta / (theta + 1.0);
  DualPoint d{{0.0, 0.0}, {1.5 * slope}};
  const FadSubsetEvaluator eval(0, 0, d, g, p);
  const std::size_t first[] = {0};
  const std::size_t both[] = {0, 1};
  EXPECT_LE(eval.evaluate(first).value, 0.0);
  EXPECT_GT(eval.evaluate(both).value, 0.0);
  EXPECT_EQ(greedy_fad_selection(eval).value, 0.0);
  EXPECT_GT(exhaustive_fad_for_user(eval).value, 0.0);
}

TEST(Greedy, NeverBeatsExhaustive) {
  std::mt19937_64 rng(43);
  double worst_gap = 0.0;
  int differing = 0;
  for (int draw = 0; draw < 300; ++draw) {
    auto in = random_sc_instance(rng, 5, 2);
    for (std::size_t k = 0; k < 2; ++k) {
      const Comparison c = compare_user(in, k);
      ASSERT_LE(c.greedy.value, c.exhaustive.value + 1e-9 * std::abs(c.exhaustive.value));
      if (c.exhaustive.value > 0.0) {
        const double gap = (c.exhaustive.value - c.greedy.value) / c.exhaustive.value;
        worst_gap = std::max(worst_gap, gap);
        if (gap > 0.0) ++differing;
      }
    }
  }
  RecordProperty("worst_relative_gap", std::to_string(worst_gap));
  RecordProperty("differing_users", differing);
}

TEST(Greedy, TraceProperties) {
  std::mt19937_64 rng(44);
  for (int draw = 0; draw < 1000; ++draw) {
    const std::size_t rrhs = 1 + draw % 7;
    auto in = random_sc_instance(rng, rrhs, 1);
    const GreedyResult r = greedy_fad_selection(0, 0, in.dual, in.gains, in.params);
    ASSERT_LE(r.candidate_evaluations, rrhs * (rrhs + 1) / 2);
    double previous = 0.0;
    std::size_t accepted = 0;
    for (const GreedyStep& s : r.trace.iterations) {
      if (s.accepted) {
        ASSERT_GT(s.value, previous);
        previous = s.value;
        ++accepted;
      } else {
        ASSERT_LE(s.value, previous);
      }
    }
    ASSERT_EQ(accepted, r.trace.final_subset.size());
    ASSERT_EQ(previous, r.value);
    std::size_t members = 0;
    for (bool b : r.subset) members += b;
    ASSERT_EQ(members, accepted);
    for (std::size_t m : r.trace.final_subset) ASSERT_TRUE(r.subset[m]);
  }
}

TEST(Greedy, ChosenSetsAreNestedAcrossRounds) {
  // Every round extends the previous set by exactly one new RRH.
  std::mt19937_64 rng(45);
  for (int draw = 0; draw < 300; ++draw) {
    auto in = random_sc_instance(rng, 6, 1);
    const GreedyResult r = greedy_fad_selection(0, 0, in.dual, in.gains, in.params);
    std::vector<bool> seen(6, false);
    for (std::size_t i = 0; i < r.trace.final_subset.size(); ++i) {
      const std::size_t m = r.trace.final_subset[i];
      ASSERT_FALSE(seen[m]);
      seen[m] = true;
      ASSERT_EQ(r.trace.iterations[i].candidate, m);
    }
  }
}

TEST(Greedy, TiesPickLowestIndex) {
  SystemParams p = SystemParams::uniform(3, 1, 1, 312500.0, 8, 1e8, 0.2, 4.9e-15);
  ChannelGains g(3, 1, 1, 1e-11);
  DualPoint d{{1e5, 1e5, 1e5}, {1e5}};
  const GreedyResult r = greedy_fad_selection(0, 0, d, g, p);
  ASSERT_FALSE(r.trace.final_subset.empty());
  EXPECT_EQ(r.trace.final_subset[0], 0u);
  for (std::size_t i = 1; i < r.trace.final_subset.size(); ++i)
    EXPECT_EQ(r.trace.final_subset[i], i);
}

TEST(Greedy, SolveScCountsCandidateEvaluations) {
  std::mt19937_64 rng(46);
  for (std::size_t rrhs = 1; rrhs <= 8; ++rrhs) {
    auto in = random_sc_instance(rng, rrhs, 2);
    SolveStats stats;
    solve_sc(0, in.dual, in.gains, in.params, FadSearch::greedy, ModePolicy::hybrid, &stats);
    EXPECT_LE(stats.greedy_candidate_evaluations, 2 * rrhs * (rrhs + 1) / 2);
    EXPECT_EQ(stats.fad_subset_evaluations, 0u);
  }
}
