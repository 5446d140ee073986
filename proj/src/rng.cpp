#include "stepguard/rng.hpp"

#include <cmath>
#include <numbers>

namespace stepguard {

double NormalStream::operator()() noexcept {
  if (cached_) {
    const double out = *cached_;
    cached_.reset();
    return out;
  }
  const double u1 = uniform_.uniform();
  const double u2 = uniform_.uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Eigen::VectorXd NormalStream::vector(Eigen::Index n) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = (*this)();
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  SplitMix64 mixer(base ^ (salt * 0xD1B54A32D192ED03ULL));
  mixer.next();
  return mixer.next();
}

}  // namespace stepguard
