#include "stepguard/sampler.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "stepguard/checksum.hpp"
#include "stepguard/rng.hpp"

namespace stepguard {
namespace {

constexpr std::uint64_t kDecoySalt = 0xDEC0;
constexpr std::uint64_t kInitialNoiseSalt = 0x1A1;
constexpr std::uint64_t kUnrelatedSalt = 0x0A0;

std::string corpus_id(int i) {
  std::ostringstream os;
  os << "ref" << std::setw(3) << std::setfill('0') << i << "/0";
  return os.str();
}

}  // namespace

std::string to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::Exact: return "exact";
    case OracleKind::Perturbed: return "perturbed";
    case OracleKind::Distractor: return "distractor";
  }
  return "?";
}

OracleKind oracle_kind_from_string(const std::string& name) {
  if (name == "exact") return OracleKind::Exact;
  if (name == "perturbed") return OracleKind::Perturbed;
  if (name == "distractor") return OracleKind::Distractor;
  throw InvalidArgument("unknown oracle kind '" + name + "'");
}

VelocityOracle::VelocityOracle(OracleConfig config) : config_(std::move(config)) {
  if (config_.target.size() == 0) throw InvalidArgument("oracle target is empty");
  detail::check_finite(config_.target, "oracle target");
  if (!(config_.noise_scale >= 0.0) || !std::isfinite(config_.noise_scale)) {
    throw InvalidArgument("oracle noise_scale must be finite and >= 0");
  }
  if (!(config_.decay >= 0.0 && config_.decay <= 1.0)) {
    throw InvalidArgument("oracle decay must lie in [0, 1]");
  }
  if (config_.kind == OracleKind::Distractor) {
    decoy_ = NormalStream(derive_seed(config_.seed, kDecoySalt)).vector(config_.target.size());
  }
}

Eigen::VectorXd VelocityOracle::aim(double t) const {
  if (config_.kind == OracleKind::Distractor) return t * config_.target + (1.0 - t) * decoy_;
  return config_.target;
}

Eigen::VectorXd VelocityOracle::operator()(const Eigen::VectorXd& z, double t, int step) const {
  detail::check_same_size(z, config_.target, "oracle");
  const double remaining = 1.0 - t;
  Eigen::VectorXd v = aim(t) - z;
  if (remaining > 0.0) v /= remaining;

  if (config_.kind == OracleKind::Perturbed && config_.noise_scale > 0.0) {
    const double sd = config_.noise_scale * std::pow(remaining, config_.decay);
    NormalStream noise(derive_seed(config_.seed, static_cast<std::uint64_t>(step)));
    v += sd * noise.vector(v.size());
  }
  return v;
}

void validate(const ScenarioSpec& spec) {
  if (spec.label != 0 && spec.label != 1) throw InvalidArgument("scenario label must be 0 or 1");
  if (spec.steps < 1) throw InvalidArgument("scenario steps must be >= 1");
  if (spec.latent_dim < 1) throw InvalidArgument("scenario latent_dim must be >= 1");
  if (spec.oracle.target.size() != spec.latent_dim) {
    throw InvalidArgument("scenario '" + spec.id + "': target dimension " +
                          std::to_string(spec.oracle.target.size()) + " != latent_dim " +
                          std::to_string(spec.latent_dim));
  }
}

std::vector<double> uniform_time_grid(int steps) {
  if (steps < 1) throw InvalidArgument("time grid needs at least one step");
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) grid[i] = static_cast<double>(i) / steps;
  return grid;
}

EulerSampler::EulerSampler(const ScenarioSpec& spec)
    : oracle_((validate(spec), spec.oracle)), times_(uniform_time_grid(spec.steps)) {
  state_.z = NormalStream(derive_seed(spec.seed, kInitialNoiseSalt)).vector(spec.latent_dim);
  state_.t = 0.0;
}

EulerSampler::Step EulerSampler::advance() {
  if (done()) throw InvalidArgument("sampler already reached t = 1");
  const int index = executed_ + 1;
  Step step{index, state_, oracle_(state_.z, state_.t, index), nullptr};
  const double dt = times_[index] - times_[index - 1];
  state_ = euler_step(state_, step.velocity, dt);
  state_.t = times_[index];
  executed_ = index;
  step.after = &state_;
  return step;
}

Trajectory run_trajectory(const ScenarioSpec& spec) {
  EulerSampler sampler(spec);
  Trajectory traj;
  traj.seed = spec.seed;
  traj.step_times = sampler.times();
  traj.states.reserve(traj.step_times.size());
  traj.velocities.reserve(static_cast<std::size_t>(spec.steps));
  traj.states.push_back(sampler.state());
  while (!sampler.done()) {
    auto step = sampler.advance();
    traj.velocities.push_back(std::move(step.velocity));
    traj.states.push_back(*step.after);
  }
  return traj;
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  detail::check_same_size(a, b, "cosine_similarity");
  const double denom = a.norm() * b.norm();
  if (denom == 0.0) throw InvalidArgument("cosine_similarity of a zero vector");
  return a.dot(b) / denom;
}

std::uint64_t latent_hash(const Eigen::VectorXd& z) {
  static_assert(std::endian::native == std::endian::little, "little-endian host expected");
  Fnv1a64 h;
  h.update(std::as_bytes(std::span<const double>(z.data(), static_cast<std::size_t>(z.size()))));
  return h.digest();
}

BenchmarkSuite make_benchmark_suite(const SuiteOptions& options) {
  if (options.corpus_size < 1) throw InvalidArgument("corpus_size must be >= 1");
  if (!(options.matched_fraction >= 0.0 && options.matched_fraction <= 1.0)) {
    throw InvalidArgument("matched_fraction must lie in [0, 1]");
  }
  if (options.latent_dim < 1) throw InvalidArgument("latent_dim must be >= 1");
  if (options.steps < 1) throw InvalidArgument("steps must be >= 1");

  BenchmarkSuite suite;
  NormalStream corpus_rng(options.seed);
  suite.corpus.reserve(static_cast<std::size_t>(options.corpus_size));
  for (int i = 0; i < options.corpus_size; ++i) {
    suite.corpus.push_back({corpus_id(i), corpus_rng.vector(options.latent_dim)});
  }

  const int count = options.num_scenarios > 0 ? options.num_scenarios : options.corpus_size;
  const auto matched = static_cast<int>(std::llround(options.matched_fraction * count));
  NormalStream unrelated_rng(derive_seed(options.seed, kUnrelatedSalt));

  suite.scenarios.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    ScenarioSpec spec;
    spec.id = "s" + std::to_string(i);
    spec.label = i < matched ? 1 : 0;
    spec.steps = options.steps;
    spec.latent_dim = options.latent_dim;
    spec.seed = derive_seed(options.seed, 0x5CE0000ULL + static_cast<std::uint64_t>(i));
    spec.oracle.kind = options.oracle;
    spec.oracle.noise_scale = options.noise_scale;
    spec.oracle.decay = options.decay;
    spec.oracle.seed = derive_seed(spec.seed, 0x0AC1E);

    if (spec.label == 1) {
      const auto& entry = suite.corpus[static_cast<std::size_t>(i % options.corpus_size)];
      spec.oracle.target = entry.latent;
      spec.target_ref = entry.id;
    } else {
      bool accepted = false;
      for (int attempt = 0; attempt < options.retry_budget && !accepted; ++attempt) {
        Eigen::VectorXd candidate = unrelated_rng.vector(options.latent_dim);
        if (candidate.norm() == 0.0) continue;
        accepted = true;
        for (const auto& entry : suite.corpus) {
          if (cosine_similarity(candidate, entry.latent) >= options.unrelated_max_cosine) {
            accepted = false;
            break;
          }
        }
        if (accepted) spec.oracle.target = std::move(candidate);
      }
      if (!accepted) {
        throw RetryBudgetExceeded("no unrelated target found within " +
                                  std::to_string(options.retry_budget) +
                                  " draws (latent_dim=" + std::to_string(options.latent_dim) + ")");
      }
    }
    suite.scenarios.push_back(std::move(spec));
  }
  return suite;
}

BenchmarkSuite make_benchmark_suite(int corpus_size, double matched_fraction, std::uint64_t seed) {
  SuiteOptions options;
  options.corpus_size = corpus_size;
  options.matched_fraction = matched_fraction;
  options.seed = seed;
  return make_benchmark_suite(options);
}

}  // namespace stepguard
