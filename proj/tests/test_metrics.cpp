#include "stepguard/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "stepguard/errors.hpp"

namespace stepguard {
namespace {

std::vector<EvalSample> random_samples(std::mt19937_64& gen, int n, double prevalence, int distinct_scores = 0) {
  std::bernoulli_distribution label(prevalence);
  std::uniform_real_distribution<double> score(-1.0, 1.0);
  std::uniform_int_distribution<int> bucket(0, std::max(distinct_scores - 1, 0));
  std::vector<EvalSample> out(n);
  for (auto& s : out) {
    s.label = label(gen);
    s.score = distinct_scores > 0 ? bucket(gen) / static_cast<double>(distinct_scores) : score(gen);
  }
  out[0].label = 1;
  out[1].label = 0;
  return out;
}

std::vector<EvalSample> flipped(std::vector<EvalSample> s) {
  for (auto& x : s) x.label = 1 - x.label;
  return s;
}

TEST(RocAuc, Examples) {
  const std::vector<EvalSample> separated = {{1, 0.9}, {1, 0.8}, {0, 0.3}, {0, 0.1}};
  EXPECT_EQ(roc_auc(separated), 1.0);
  const std::vector<EvalSample> tied = {{1, 0.4}, {0, 0.4}, {1, 0.4}, {0, 0.4}, {0, 0.4}};
  EXPECT_EQ(roc_auc(tied), 0.5);
  const std::vector<EvalSample> reversed = {{0, 0.9}, {1, 0.1}};
  EXPECT_EQ(roc_auc(reversed), 0.0);
  // one of two negatives outranks the positive: 1/2
  const std::vector<EvalSample> half = {{0, 0.9}, {1, 0.5}, {0, 0.1}};
  EXPECT_EQ(roc_auc(half), 0.5);
}

TEST(RocAuc, MatchesPairCountOracle) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = random_samples(gen, 200, 0.4, trial % 2 ? 15 : 0);
    EXPECT_NEAR(roc_auc(s), oracle::pair_count_auc(s), 1e-9);
  }
}

TEST(RocAuc, FlippedLabelsSumToOne) {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_samples(gen, 1 + 3 + trial * 7, 0.3, trial % 3 ? 0 : 5);
    EXPECT_EQ(roc_auc(s) + roc_auc(flipped(s)), 1.0);
  }
}

TEST(RocAuc, InvariantUnderIncreasingTransform) {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_samples(gen, 300, 0.5, trial % 2 ? 20 : 0);
    auto t = s;
    for (auto& x : t) x.score = std::exp(3.0 * x.score) + 7.0;
    EXPECT_EQ(roc_auc(s), roc_auc(t));
    EXPECT_EQ(pr_auc(s), pr_auc(t));
  }
}

TEST(RocAuc, Errors) {
  const std::vector<EvalSample> positives = {{1, 0.2}, {1, 0.3}};
  EXPECT_THROW(roc_auc(positives), InvalidArgument);
  EXPECT_THROW(roc_auc(std::vector<EvalSample>{}), InvalidArgument);
  EXPECT_THROW(roc_auc(std::vector<EvalSample>{{1, 0.1}, {0, NAN}}), InvalidArgument);
  EXPECT_THROW(roc_auc(std::vector<EvalSample>{{1, 0.1}, {2, 0.3}}), InvalidArgument);
}

TEST(PrAuc, Examples) {
  const std::vector<EvalSample> separated = {{1, 0.9}, {0, 0.3}, {1, 0.8}, {0, 0.1}};
  EXPECT_EQ(pr_auc(separated), 1.0);
  EXPECT_THROW(pr_auc(std::vector<EvalSample>{{1, 0.5}, {1, 0.6}}), InvalidArgument);
  // ranks: +, -, +  -> AP = (1 + 2/3) / 2
  const std::vector<EvalSample> mixed = {{1, 0.9}, {0, 0.5}, {1, 0.2}};
  EXPECT_DOUBLE_EQ(pr_auc(mixed), (1.0 + 2.0 / 3.0) / 2.0);
}

TEST(PrAuc, MatchesAveragePrecisionOracle) {
  std::mt19937_64 gen(34);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = random_samples(gen, 150, 0.35, trial % 2 ? 10 : 0);
    EXPECT_NEAR(pr_auc(s), oracle::average_precision(s), 1e-12);
  }
}

TEST(PrAuc, RandomScoresApproachPrevalence) {
  std::mt19937_64 gen(35);
  const auto s = random_samples(gen, 2000, 0.5);
  const double v = pr_auc(s);
  EXPECT_GE(v, 0.45);
  EXPECT_LE(v, 0.55);
}

TEST(Metrics, BothOneIffSeparated) {
  std::mt19937_64 gen(36);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = random_samples(gen, 12, 0.5, 6);
    if (trial % 2 == 0) {
      for (auto& x : s) x.score = x.label ? 0.6 + x.score * 0.1 : x.score * 0.5;
    }
    double min_pos = INFINITY, max_neg = -INFINITY;
    for (const auto& x : s) {
      if (x.label == 1) min_pos = std::min(min_pos, x.score);
      else max_neg = std::max(max_neg, x.score);
    }
    const bool separated = min_pos > max_neg;
    EXPECT_EQ(roc_auc(s) == 1.0, separated);
    EXPECT_EQ(pr_auc(s) == 1.0, separated);
  }
}

TEST(Summarize, CurvePointsAreConsistent) {
  const std::vector<EvalSample> s = {{1, 0.9}, {0, 0.7}, {1, 0.7}, {0, 0.2}};
  const auto summary = summarize(s);
  EXPECT_EQ(summary.roc_auc, roc_auc(s));
  EXPECT_EQ(summary.pr_auc, pr_auc(s));
  ASSERT_EQ(summary.curve_points.size(), 3u);
  EXPECT_EQ(summary.curve_points[0].threshold, 0.9);
  EXPECT_EQ(summary.curve_points[0].tpr, 0.5);
  EXPECT_EQ(summary.curve_points[0].fpr, 0.0);
  EXPECT_EQ(summary.curve_points[1].precision, 2.0 / 3.0);
  EXPECT_EQ(summary.curve_points[2].tpr, 1.0);
  EXPECT_EQ(summary.curve_points[2].fpr, 1.0);
  EXPECT_EQ(summary.curve_points[2].accuracy, 0.5);
  for (const auto& p : summary.curve_points) {
    EXPECT_GE(p.accuracy, 0.0);
    EXPECT_LE(p.accuracy, 1.0);
  }
}

TEST(ThresholdSweep, Examples) {
  const std::vector<EvalSample> s = {{1, 0.9}, {1, 0.8}, {0, 0.3}, {0, 0.2}, {0, 0.1}};
  const std::vector<double> grid = {0.5, 0.0, 0.95, 0.8};
  const auto sweep = threshold_sweep(s, grid);
  ASSERT_EQ(sweep.size(), 4u);
  EXPECT_EQ(sweep[0].accuracy, 1.0);
  EXPECT_EQ(sweep[1].accuracy, 0.4);  // everything rejected: prevalence
  EXPECT_EQ(sweep[2].accuracy, 0.6);  // nothing rejected
  EXPECT_EQ(sweep[3].accuracy, 0.8);  // strict: 0.8 is not above 0.8
  EXPECT_EQ(sweep[3].threshold, 0.8);
}

TEST(ThresholdSweep, Errors) {
  const std::vector<EvalSample> s = {{1, 0.9}};
  EXPECT_THROW(threshold_sweep(s, std::vector<double>{}), InvalidArgument);
  EXPECT_THROW(threshold_sweep(std::vector<EvalSample>{}, default_threshold_grid()), InvalidArgument);
  EXPECT_NO_THROW(threshold_sweep(s, default_threshold_grid()));
}

TEST(ThresholdSweep, DefaultGrid) {
  const auto grid = default_threshold_grid();
  ASSERT_EQ(grid.size(), 9u);
  EXPECT_DOUBLE_EQ(grid.front(), 0.1);
  EXPECT_DOUBLE_EQ(grid.back(), 0.9);
}

}  // namespace
}  // namespace stepguard
