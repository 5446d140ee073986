#pragma once

// Deterministic Euler ODE sampling with synthetic velocity oracles that stand
// in for a trained flow model, plus labeled benchmark-suite generation.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stepguard/schedule.hpp"

namespace stepguard {

enum class OracleKind {
  Exact,       // velocity of the straight path through the current state to the target
  Perturbed,   // Exact plus zero-mean Gaussian noise decaying as (1 - t)^decay
  Distractor,  // straight path towards a blend that moves from a decoy to the target
};

struct OracleConfig {
  OracleKind kind = OracleKind::Exact;
  Eigen::VectorXd target;
  double noise_scale = 0.0;
  double decay = 1.0;
  std::uint64_t seed = 0;
};

/// Stateless velocity field. Same configuration and same (z, t, step) always
/// produce bit-identical output.
class VelocityOracle {
 public:
  explicit VelocityOracle(OracleConfig config);

  Eigen::VectorXd operator()(const Eigen::VectorXd& z, double t, int step) const;

  const OracleConfig& config() const noexcept { return config_; }
  const Eigen::VectorXd& target() const noexcept { return config_.target; }
  /// Where the oracle currently believes the trajectory ends.
  Eigen::VectorXd aim(double t) const;

 private:
  OracleConfig config_;
  Eigen::VectorXd decoy_;
};

struct ScenarioSpec {
  std::string id;
  int label = 0;
  int steps = 9;
  int latent_dim = 0;
  std::uint64_t seed = 0;
  OracleConfig oracle;
  std::string target_ref;  // corpus id the target was drawn from (label 1 only)
};

void validate(const ScenarioSpec& spec);

/// Presets mirroring the two step-count regimes of few-step and many-step
/// flow backbones.
inline constexpr int kFewStepPreset = 9;
inline constexpr int kManyStepPreset = 50;

/// Uniform grid 0 = t_0 < ... < t_K = 1.
std::vector<double> uniform_time_grid(int steps);

/// One explicit Euler step: (z + dt * v, min(t + dt, 1)).
template <typename Scalar, typename DerivedV>
LatentState<Scalar> euler_step(const LatentState<Scalar>& state,
                               const Eigen::MatrixBase<DerivedV>& velocity, Scalar dt) {
  detail::check_same_size(state.z, velocity, "euler_step");
  if (!(dt > Scalar(0))) throw InvalidArgument("euler_step: dt must be positive");
  if (static_cast<double>(state.t) + static_cast<double>(dt) > 1.0 + 1e-9) {
    throw InvalidArgument("euler_step: step would overshoot t = 1");
  }
  detail::check_finite(velocity, "euler_step velocity");
  LatentState<Scalar> next;
  next.z = state.z + dt * velocity;
  next.t = std::min<Scalar>(state.t + dt, Scalar(1));
  return next;
}

/// Incremental sampler so callers can observe (and stop) the loop per step.
class EulerSampler {
 public:
  struct Step {
    int index;                      // 1-based step just executed
    LatentState<double> before;     // state the velocity was evaluated at
    Eigen::VectorXd velocity;
    const LatentState<double>* after;
  };

  explicit EulerSampler(const ScenarioSpec& spec);

  bool done() const noexcept { return executed_ == steps(); }
  int steps() const noexcept { return static_cast<int>(times_.size()) - 1; }
  int executed() const noexcept { return executed_; }
  const LatentState<double>& state() const noexcept { return state_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const VelocityOracle& oracle() const noexcept { return oracle_; }

  Step advance();

 private:
  VelocityOracle oracle_;
  std::vector<double> times_;
  LatentState<double> state_;
  int executed_ = 0;
};

struct Trajectory {
  std::vector<LatentState<double>> states;   // K + 1 states, states[i].t = step_times[i]
  std::vector<Eigen::VectorXd> velocities;   // K velocities, velocities[i] evaluated at states[i]
  std::vector<double> step_times;
  std::uint64_t seed = 0;
};

Trajectory run_trajectory(const ScenarioSpec& spec);

struct CorpusEntry {
  std::string id;
  Eigen::VectorXd latent;
};

struct SuiteOptions {
  int corpus_size = 10;
  int num_scenarios = 0;  // 0: one scenario per corpus entry
  double matched_fraction = 0.5;
  int latent_dim = 64;
  int steps = kFewStepPreset;
  OracleKind oracle = OracleKind::Exact;
  double noise_scale = 0.0;
  double decay = 1.0;
  std::uint64_t seed = 0;
  double unrelated_max_cosine = 0.5;
  int retry_budget = 1000;
};

struct BenchmarkSuite {
  std::vector<CorpusEntry> corpus;
  std::vector<ScenarioSpec> scenarios;
};

/// Draws a corpus of random clean latents and labeled scenarios against it.
/// Label-1 targets are corpus members; label-0 targets are rejection-sampled
/// until their cosine similarity to every corpus member is below
/// `unrelated_max_cosine`.
BenchmarkSuite make_benchmark_suite(const SuiteOptions& options);
BenchmarkSuite make_benchmark_suite(int corpus_size, double matched_fraction, std::uint64_t seed);

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// FNV-1a over the little-endian bytes of the vector's doubles.
std::uint64_t latent_hash(const Eigen::VectorXd& z);

std::string to_string(OracleKind kind);
OracleKind oracle_kind_from_string(const std::string& name);

}  // namespace stepguard
