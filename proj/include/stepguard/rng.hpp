#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

namespace stepguard {

/// SplitMix64 generator. The algorithm is fixed so that seeded matrices and
/// trajectories are reproducible bit-for-bit across runs and platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in the open interval (0, 1), 53 bits of resolution.
  double uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Standard normal draws via the Box-Muller transform over SplitMix64.
/// Each pair of uniforms yields two normals; the sine branch is cached.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) noexcept : uniform_(seed) {}

  double operator()() noexcept;

  Eigen::VectorXd vector(Eigen::Index n);

 private:
  SplitMix64 uniform_;
  std::optional<double> cached_;
};

/// Derives an independent stream seed from a base seed and a salt.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept;

}  // namespace stepguard
