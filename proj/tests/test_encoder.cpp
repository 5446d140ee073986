#include "stepguard/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "stepguard/errors.hpp"
#include "stepguard/rng.hpp"

namespace stepguard {
namespace {

using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(Encode, IdentityIsUnchanged) {
  const Encoder enc(EncoderSpec{EncoderKind::Identity, 0, 0}, 3);
  const auto e = encode(vec({1, 2, 3}), enc, "a/b");
  EXPECT_EQ(e.vec, vec({1, 2, 3}));
  EXPECT_EQ(e.id, "a/b");
  EXPECT_THROW(Encoder(EncoderSpec{EncoderKind::Identity, 4, 0}, 3), InvalidArgument);
}

TEST(Encode, DownsampleTakesBlockMeans) {
  const Encoder enc(EncoderSpec{EncoderKind::Downsample, 2, 0}, 4);
  EXPECT_EQ(enc(vec({1, 3, 5, 7})), vec({2, 6}));
  EXPECT_THROW(Encoder(EncoderSpec{EncoderKind::Downsample, 3, 0}, 4), InvalidArgument);
}

TEST(Encode, RandomProjectionIsDeterministic) {
  const Encoder a(EncoderSpec{EncoderKind::RandomProjection, 16, 5}, 32);
  const Encoder b(EncoderSpec{EncoderKind::RandomProjection, 16, 5}, 32);
  const VectorXd x = NormalStream(1).vector(32);
  const VectorXd ea = a(x), eb = b(x);
  EXPECT_EQ(std::memcmp(ea.data(), eb.data(), sizeof(double) * 16), 0);
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  const Encoder c(EncoderSpec{EncoderKind::RandomProjection, 16, 6}, 32);
  EXPECT_NE(c(x), ea);
  EXPECT_NE(c.fingerprint(), a.fingerprint());
}

TEST(Encode, RejectsBadInput) {
  const Encoder enc(EncoderSpec{EncoderKind::RandomProjection, 4, 5}, 8);
  EXPECT_THROW(enc(VectorXd::Zero(7)), InvalidArgument);
  VectorXd bad = VectorXd::Zero(8);
  bad[3] = NAN;
  EXPECT_THROW(enc(bad), NonFiniteValue);
  EXPECT_THROW(Encoder(EncoderSpec{EncoderKind::RandomProjection, 0, 5}, 8), InvalidArgument);
}

TEST(Encode, GoldenVectors) {
  std::ifstream in(STEPGUARD_FIXTURE_DIR "/encoder_golden.json");
  const auto doc = nlohmann::json::parse(in);
  for (const auto& c : doc.at("cases")) {
    const auto input = c.at("input").get<std::vector<double>>();
    const auto expected = c.at("expected").get<std::vector<double>>();
    const Encoder enc(EncoderSpec{encoder_kind_from_string(c.at("kind")), c.at("out_dim").get<int>(),
                                  c.at("seed").get<std::uint64_t>()},
                      static_cast<int>(input.size()));
    const VectorXd out = enc(Eigen::Map<const VectorXd>(input.data(), static_cast<Eigen::Index>(input.size())));
    ASSERT_EQ(out.size(), static_cast<Eigen::Index>(expected.size()));
    for (std::size_t i = 0; i < expected.size(); ++i) {
      EXPECT_NEAR(out[static_cast<Eigen::Index>(i)], expected[i], 1e-8 * std::max(1.0, std::abs(expected[i])))
          << "seed " << c.at("seed") << " row " << i;
    }
  }
}

double isometry_hit_rate(int out_dim, int trials) {
  int hits = 0;
  for (int s = 0; s < trials; ++s) {
    const Encoder enc(EncoderSpec{EncoderKind::RandomProjection, out_dim, static_cast<std::uint64_t>(s)}, 256);
    NormalStream g(50000 + static_cast<std::uint64_t>(s));
    const VectorXd u = g.vector(256).normalized();
    const VectorXd w = g.vector(256).normalized();
    const VectorXd pu = enc(u), pw = enc(w);
    const double projected = pu.dot(pw) / (pu.norm() * pw.norm());
    if (std::abs(projected - u.dot(w)) <= 0.2) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

TEST(RandomProjection, PreservesCosineWithinBound) {
  EXPECT_GE(isometry_hit_rate(128, 400), 0.95);
  EXPECT_GE(isometry_hit_rate(256, 400), 0.95);
}

// For nearly orthogonal inputs the projected cosine has sd ~ 1/sqrt(d), so at
// d = 64 the 0.2 band covers about erf(0.2 * 8 / sqrt 2) ~ 0.889 of draws.
TEST(RandomProjection, SmallDimensionFollowsGaussianRate) {
  const double expected = std::erf(0.2 * std::sqrt(64.0) / std::sqrt(2.0));
  EXPECT_NEAR(isometry_hit_rate(64, 1000), expected, 0.04);
}

TEST(Decode, IdentityAndFixedLinear) {
  const Decoder id;
  EXPECT_EQ(id.kind(), DecoderKind::Identity);
  EXPECT_EQ(decode(vec({1, -2}), id), vec({1, -2}));

  const Decoder twice(2.0 * Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(twice.kind(), DecoderKind::FixedLinear);
  EXPECT_EQ(decode(vec({1, 2, 3}), twice), vec({2, 4, 6}));
  EXPECT_THROW(decode(vec({1, 2}), twice), InvalidArgument);
}

TEST(Decode, RejectsRankDeficientMatrix) {
  Eigen::MatrixXd m(3, 2);
  m << 1, 2, 2, 4, 3, 6;
  EXPECT_THROW(Decoder{m}, InvalidArgument);
  EXPECT_THROW(Decoder::random_linear(2, 3, 1), InvalidArgument);
}

TEST(Decode, RandomFullRankMapIsInjective) {
  const Decoder dec = Decoder::random_linear(24, 16, 8);
  NormalStream g(12);
  for (int i = 0; i < 200; ++i) {
    const VectorXd a = g.vector(16), b = g.vector(16);
    EXPECT_GT((dec(a) - dec(b)).norm(), 0.0);
  }
  EXPECT_EQ(dec.output_dim(16), 24);
}

}  // namespace
}  // namespace stepguard
