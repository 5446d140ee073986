#include "stepguard/rng.hpp"

#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

namespace stepguard {
namespace {

nlohmann::json golden() {
  std::ifstream in(STEPGUARD_FIXTURE_DIR "/encoder_golden.json");
  return nlohmann::json::parse(in);
}

TEST(SplitMix64, MatchesReferenceSequence) {
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ULL);
  EXPECT_EQ(rng.next(), 3203168211198807973ULL);
  EXPECT_EQ(rng.next(), 9817491932198370423ULL);
  EXPECT_EQ(rng.next(), 4593380528125082431ULL);
  EXPECT_EQ(rng.next(), 16408922859458223821ULL);
}

TEST(SplitMix64, FixtureAgreesWithReference) {
  const auto expected = golden().at("splitmix64_seed_1234567").get<std::vector<std::uint64_t>>();
  SplitMix64 rng(1234567);
  for (auto v : expected) EXPECT_EQ(rng.next(), v);
}

TEST(SplitMix64, UniformStaysInOpenInterval) {
  SplitMix64 rng(0);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(NormalStream, MatchesGoldenDraws) {
  const auto expected = golden().at("normal_seed_2024").get<std::vector<double>>();
  NormalStream normal(2024);
  for (double e : expected) EXPECT_NEAR(normal(), e, 1e-8 * std::max(1.0, std::abs(e)));
}

TEST(NormalStream, MomentsLookStandard) {
  NormalStream normal(99);
  const Eigen::VectorXd v = normal.vector(200000);
  EXPECT_NEAR(v.mean(), 0.0, 0.01);
  EXPECT_NEAR((v.array() - v.mean()).square().mean(), 1.0, 0.02);
}

TEST(DeriveSeed, DistinctSaltsGiveDistinctSeeds) {
  EXPECT_NE(derive_seed(1, 1), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 1), derive_seed(2, 1));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

}  // namespace
}  // namespace stepguard
