#pragma once

// In-loop content filter: at configured sampler steps, estimate the clean
// sample, embed it, score it against the reference index and, when the
// maximum similarity exceeds gamma, reject (and optionally stop sampling).

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stepguard/encoder.hpp"
#include "stepguard/ref_index.hpp"
#include "stepguard/sampler.hpp"
#include "stepguard/schedule.hpp"

namespace stepguard {

using Duration = std::chrono::nanoseconds;

enum class FilterMode { EarlyStop, ScoreOnly };
enum class Verdict { Accept, Reject };

/// Synthetic costs that replace wall-clock time, so latency results are
/// deterministic.
struct CostModel {
  Duration per_step{};
  Duration scoring_overhead{};
};

struct FilterConfig {
  double gamma = 0.0;
  std::vector<int> check_steps;  // 1-based, ascending
  FilterMode mode = FilterMode::EarlyStop;
  std::optional<CostModel> cost_model;
  bool use_xpred = true;  // false: score the raw latent z_t instead

  /// Throws InvalidArgument unless the config is usable with `steps` sampler steps.
  void validate(int steps) const;
};

struct Decision {
  Verdict verdict = Verdict::Accept;
  double p = 0.0;
  int step_decided = 0;
  std::string argmax_id;
};

struct CheckRecord {
  int step = 0;
  double p = 0.0;
  std::string argmax_id;
};

/// Timestamps are offsets from the run's clock origin.
struct LatencyLedger {
  Duration t_start{};
  Duration t_score_ready{};
  Duration t_generation_end{};
  int steps_executed = 0;
  int steps_saved = 0;

  Duration latency() const noexcept { return t_score_ready - t_start; }
};

struct FilterResult {
  Decision decision;
  LatencyLedger ledger;
  std::vector<CheckRecord> checks;
  std::optional<Eigen::VectorXd> final_latent;  // present when sampling ran to t = 1
};

/// Monotonic clock that either reads std::chrono::steady_clock or advances by
/// a cost model's synthetic charges.
class LedgerClock {
 public:
  explicit LedgerClock(std::optional<CostModel> model);

  Duration now() const;
  void charge_step();
  void charge_scoring();

 private:
  std::optional<CostModel> model_;
  std::chrono::steady_clock::time_point origin_;
  Duration simulated_{};
};

/// The pipeline latent -> decode -> encode -> score, bound to one index.
/// Holds references; the index, encoder and decoder must outlive it.
class ContentFilter {
 public:
  ContentFilter(const ReferenceIndex& index, const Encoder& encoder, const Decoder& decoder,
                FilterConfig config, int steps, Schedule schedule = Schedule{});

  const FilterConfig& config() const noexcept { return config_; }
  int steps() const noexcept { return steps_; }

  FilterResult run(const ScenarioSpec& spec) const;

  SimilarityReport score_latent(const Eigen::VectorXd& latent) const;

 private:
  const ReferenceIndex& index_;
  const Encoder& encoder_;
  const Decoder& decoder_;
  FilterConfig config_;
  int steps_;
  Schedule schedule_;
};

FilterResult run_filtered(const ScenarioSpec& spec, const ReferenceIndex& index, const Encoder& encoder,
                          const Decoder& decoder, const FilterConfig& config);

/// Output-based baseline: sample all K steps, then score the final latent once.
FilterResult run_unfiltered_then_check(const ScenarioSpec& spec, const ReferenceIndex& index,
                                       const Encoder& encoder, const Decoder& decoder, double gamma,
                                       std::optional<CostModel> cost_model = std::nullopt);

std::string to_string(Verdict v);
std::string to_string(FilterMode m);
FilterMode filter_mode_from_string(const std::string& name);

}  // namespace stepguard
