#include "stepguard/filter_engine.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "stepguard/bench.hpp"
#include "stepguard/errors.hpp"

namespace stepguard {
namespace {

using namespace std::chrono_literals;

struct Fixture {
  BenchmarkSuite suite;
  Encoder encoder;
  Decoder decoder;
  ReferenceIndex index;

  static Fixture make(OracleKind kind, double noise, int steps, int corpus, int scenarios, double matched,
                      std::uint64_t seed, int dim = 64) {
    SuiteOptions o;
    o.corpus_size = corpus;
    o.num_scenarios = scenarios;
    o.matched_fraction = matched;
    o.latent_dim = dim;
    o.steps = steps;
    o.oracle = kind;
    o.noise_scale = noise;
    o.seed = seed;
    auto suite = make_benchmark_suite(o);
    Encoder enc(EncoderSpec{EncoderKind::RandomProjection, 128, seed + 1}, dim);
    Decoder dec;
    auto index = build_corpus_index(suite.corpus, enc, dec);
    return Fixture{std::move(suite), std::move(enc), dec, std::move(index)};
  }
};

FilterConfig config(double gamma, std::vector<int> checks, FilterMode mode = FilterMode::EarlyStop) {
  FilterConfig c;
  c.gamma = gamma;
  c.check_steps = std::move(checks);
  c.mode = mode;
  return c;
}

TEST(RunFiltered, ExactMatchedTargetRejectsAtFirstCheck) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 10, 10, 1.0, 1);
  for (const auto& spec : f.suite.scenarios) {
    const auto r = run_filtered(spec, f.index, f.encoder, f.decoder, config(0.9, {1}));
    EXPECT_EQ(r.decision.verdict, Verdict::Reject);
    EXPECT_EQ(r.decision.step_decided, 1);
    EXPECT_EQ(r.decision.argmax_id, spec.target_ref);
    EXPECT_NEAR(r.decision.p, 1.0, 1e-6);
    EXPECT_EQ(r.ledger.steps_executed, 1);
    EXPECT_EQ(r.ledger.steps_saved, 8);
    EXPECT_FALSE(r.final_latent.has_value());
  }
}

TEST(RunFiltered, ExactUnrelatedTargetAccepts) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 10, 10, 0.0, 2);
  for (const auto& spec : f.suite.scenarios) {
    const auto r = run_filtered(spec, f.index, f.encoder, f.decoder, config(0.9, {1}));
    EXPECT_EQ(r.decision.verdict, Verdict::Accept);
    EXPECT_LE(r.decision.p, 0.9);
    EXPECT_EQ(r.ledger.steps_executed, 9);
    EXPECT_EQ(r.ledger.steps_saved, 0);
    ASSERT_TRUE(r.final_latent.has_value());
  }
}

// Paired Monte-Carlo over identical seeds: x-pred vs the raw latent at step 1.
TEST(RunFiltered, XPredRaisesEarlyRejectRate) {
  const auto f = Fixture::make(OracleKind::Perturbed, 0.5, 9, 20, 100, 1.0, 3);
  int with = 0, without = 0;
  auto raw_cfg = config(0.7, {1});
  raw_cfg.use_xpred = false;
  for (const auto& spec : f.suite.scenarios) {
    with += run_filtered(spec, f.index, f.encoder, f.decoder, config(0.7, {1})).decision.verdict == Verdict::Reject;
    without += run_filtered(spec, f.index, f.encoder, f.decoder, raw_cfg).decision.verdict == Verdict::Reject;
  }
  EXPECT_GT(with, without);
}

TEST(RunUnfilteredThenCheck, SameVerdictWithoutSavings) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 10, 10, 1.0, 4);
  for (const auto& spec : f.suite.scenarios) {
    const auto base = run_unfiltered_then_check(spec, f.index, f.encoder, f.decoder, 0.9);
    EXPECT_EQ(base.decision.verdict, Verdict::Reject);
    EXPECT_EQ(base.ledger.steps_saved, 0);
    EXPECT_EQ(base.ledger.steps_executed, 9);
    EXPECT_GE(base.ledger.t_score_ready, base.ledger.t_generation_end);
    EXPECT_GE(base.ledger.t_generation_end, base.ledger.t_start);
  }
}

TEST(RunFiltered, CostModelLatencyFraction) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 4, 4, 1.0, 5);
  auto cfg = config(0.9, {1});
  cfg.cost_model = CostModel{10ms, 2ms};
  const auto& spec = f.suite.scenarios.front();
  const auto filtered = run_filtered(spec, f.index, f.encoder, f.decoder, cfg);
  const auto base = run_unfiltered_then_check(spec, f.index, f.encoder, f.decoder, 0.9, cfg.cost_model);
  EXPECT_EQ(filtered.ledger.latency(), 12ms);
  EXPECT_EQ(base.ledger.latency(), 92ms);
  EXPECT_LE(filtered.ledger.latency().count(), 0.25 * base.ledger.latency().count());
}

TEST(FilterConfig, ValidatedAtConstruction) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 3, 3, 1.0, 6);
  EXPECT_THROW(ContentFilter(f.index, f.encoder, f.decoder, config(0.5, {10}), 9), InvalidArgument);
  EXPECT_THROW(ContentFilter(f.index, f.encoder, f.decoder, config(0.5, {}), 9), InvalidArgument);
  EXPECT_THROW(ContentFilter(f.index, f.encoder, f.decoder, config(0.5, {3, 2}), 9), InvalidArgument);
  EXPECT_THROW(ContentFilter(f.index, f.encoder, f.decoder, config(0.5, {0}), 9), InvalidArgument);
  EXPECT_THROW(ContentFilter(f.index, f.encoder, f.decoder, config(1.5, {1}), 9), InvalidArgument);
  EXPECT_THROW(ContentFilter(f.index, f.encoder, f.decoder, config(NAN, {1}), 9), InvalidArgument);
  const ContentFilter ok(f.index, f.encoder, f.decoder, config(0.5, {1}), 9);
  auto other = f.suite.scenarios.front();
  other.steps = 5;
  EXPECT_THROW(ok.run(other), InvalidArgument);
}

TEST(FilterConfig, DimensionMismatchRejected) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 3, 3, 1.0, 7);
  const Encoder wrong_out(EncoderSpec{EncoderKind::RandomProjection, 32, 1}, 64);
  EXPECT_THROW(ContentFilter(f.index, wrong_out, f.decoder, config(0.5, {1}), 9), InvalidArgument);
  const Decoder widen = Decoder::random_linear(80, 64, 2);
  const ContentFilter filter(f.index, f.encoder, widen, config(0.5, {1}), 9);
  EXPECT_THROW(filter.run(f.suite.scenarios.front()), InvalidArgument);
}

TEST(FilterInvariants, VerdictMatchesThresholdRule) {
  const auto f = Fixture::make(OracleKind::Perturbed, 0.8, 9, 15, 60, 0.5, 8);
  for (auto mode : {FilterMode::EarlyStop, FilterMode::ScoreOnly}) {
    for (double gamma : {0.3, 0.6, 0.8}) {
      const ContentFilter filter(f.index, f.encoder, f.decoder, config(gamma, {1, 3, 5, 9}, mode), 9);
      for (const auto& spec : f.suite.scenarios) {
        const auto r = filter.run(spec);
        const bool any = std::any_of(r.checks.begin(), r.checks.end(), [&](auto& c) { return c.p > gamma; });
        EXPECT_EQ(r.decision.verdict == Verdict::Reject, any);
        if (r.decision.verdict == Verdict::Reject) EXPECT_GT(r.decision.p, gamma);
        double running = -2.0;
        for (const auto& c : r.checks) running = std::max(running, c.p);
        EXPECT_EQ(r.decision.p, running);
        EXPECT_EQ(r.ledger.steps_executed + r.ledger.steps_saved, 9);
        EXPECT_LE(r.ledger.t_start, r.ledger.t_score_ready);
        if (mode == FilterMode::EarlyStop && r.decision.verdict == Verdict::Reject) {
          EXPECT_EQ(r.ledger.steps_executed, r.decision.step_decided);
          EXPECT_EQ(r.checks.back().step, r.decision.step_decided);
        }
      }
    }
  }
}

TEST(FilterInvariants, ScoreOnlyDoesNotPerturbTrajectory) {
  const auto f = Fixture::make(OracleKind::Perturbed, 0.5, 9, 10, 40, 0.5, 9);
  const ContentFilter filter(f.index, f.encoder, f.decoder, config(0.2, {1, 2, 5}, FilterMode::ScoreOnly), 9);
  for (const auto& spec : f.suite.scenarios) {
    const auto observed = filter.run(spec);
    const auto plain = run_unfiltered_then_check(spec, f.index, f.encoder, f.decoder, 0.2);
    ASSERT_TRUE(observed.final_latent.has_value());
    EXPECT_EQ(latent_hash(*observed.final_latent), latent_hash(*plain.final_latent));
    EXPECT_EQ(latent_hash(*observed.final_latent), latent_hash(run_trajectory(spec).states.back().z));
  }
}

TEST(FilterInvariants, MoreChecksNeverFlipRejectToAccept) {
  const auto f = Fixture::make(OracleKind::Exact, 0, 9, 10, 20, 0.5, 10);
  const std::vector<std::vector<int>> nested = {{5}, {3, 5}, {1, 3, 5}, {1, 2, 3, 5, 9}};
  for (const auto& spec : f.suite.scenarios) {
    bool rejected = false;
    for (const auto& checks : nested) {
      const bool now = run_filtered(spec, f.index, f.encoder, f.decoder, config(0.9, checks)).decision.verdict ==
                       Verdict::Reject;
      if (rejected) EXPECT_TRUE(now);
      rejected = rejected || now;
    }
  }
}

TEST(LedgerClock, WallClockIsMonotonic) {
  LedgerClock clock(std::nullopt);
  const auto a = clock.now();
  clock.charge_step();
  EXPECT_GE(clock.now(), a);
  LedgerClock sim(CostModel{5ms, 1ms});
  sim.charge_step();
  sim.charge_scoring();
  EXPECT_EQ(sim.now(), 6ms);
}

}  // namespace
}  // namespace stepguard
