#include "stepguard/filter_engine.hpp"

#include <algorithm>
#include <cmath>

#include "stepguard/errors.hpp"

namespace stepguard {

std::string to_string(Verdict v) { return v == Verdict::Reject ? "reject" : "accept"; }

std::string to_string(FilterMode m) { return m == FilterMode::EarlyStop ? "early-stop" : "score-only"; }

FilterMode filter_mode_from_string(const std::string& name) {
  if (name == "early-stop" || name == "EarlyStop") return FilterMode::EarlyStop;
  if (name == "score-only" || name == "ScoreOnly") return FilterMode::ScoreOnly;
  throw InvalidArgument("unknown filter mode '" + name + "'");
}

void FilterConfig::validate(int steps) const {
  if (!std::isfinite(gamma) || gamma < -1.0 || gamma > 1.0) {
    throw InvalidArgument("gamma must be finite and lie in [-1, 1]");
  }
  if (check_steps.empty()) throw InvalidArgument("check_steps must not be empty");
  for (std::size_t i = 0; i < check_steps.size(); ++i) {
    const int s = check_steps[i];
    if (s < 1 || s > steps) {
      throw InvalidArgument("check step " + std::to_string(s) + " outside [1, " + std::to_string(steps) + "]");
    }
    if (i > 0 && s <= check_steps[i - 1]) throw InvalidArgument("check_steps must be strictly ascending");
  }
  if (cost_model && (cost_model->per_step.count() < 0 || cost_model->scoring_overhead.count() < 0)) {
    throw InvalidArgument("cost model durations must be non-negative");
  }
}

LedgerClock::LedgerClock(std::optional<CostModel> model)
    : model_(model), origin_(std::chrono::steady_clock::now()) {}

Duration LedgerClock::now() const {
  if (model_) return simulated_;
  return std::chrono::duration_cast<Duration>(std::chrono::steady_clock::now() - origin_);
}

void LedgerClock::charge_step() {
  if (model_) simulated_ += model_->per_step;
}

void LedgerClock::charge_scoring() {
  if (model_) simulated_ += model_->scoring_overhead;
}

ContentFilter::ContentFilter(const ReferenceIndex& index, const Encoder& encoder, const Decoder& decoder,
                             FilterConfig config, int steps, Schedule schedule)
    : index_(index), encoder_(encoder), decoder_(decoder), config_(std::move(config)), steps_(steps),
      schedule_(schedule) {
  if (steps < 1) throw InvalidArgument("filter needs at least one sampler step");
  config_.validate(steps);
  if (encoder_.output_dim() != index_.dim()) {
    throw InvalidArgument("encoder output dim " + std::to_string(encoder_.output_dim()) +
                          " != index dim " + std::to_string(index_.dim()));
  }
}

SimilarityReport ContentFilter::score_latent(const Eigen::VectorXd& latent) const {
  return score(index_, encoder_(decoder_(latent)));
}

FilterResult ContentFilter::run(const ScenarioSpec& spec) const {
  if (spec.steps != steps_) {
    throw InvalidArgument("scenario has " + std::to_string(spec.steps) + " steps, filter configured for " +
                          std::to_string(steps_));
  }
  if (decoder_.output_dim(spec.latent_dim) != encoder_.input_dim()) {
    throw InvalidArgument("decoded dimension does not match encoder input dimension");
  }

  LedgerClock clock(config_.cost_model);
  FilterResult result;
  result.ledger.t_start = clock.now();
  EulerSampler sampler(spec);

  bool rejected = false;
  bool have_score = false;
  auto next_check = config_.check_steps.begin();
  while (!sampler.done() && next_check != config_.check_steps.end()) {
    auto step = sampler.advance();
    clock.charge_step();
    if (step.index != *next_check) continue;
    ++next_check;

    Eigen::VectorXd query_latent =
        config_.use_xpred
            ? x_pred(step.before, Prediction<double>{PredictionKind::Velocity, step.velocity}, schedule_)
            : step.after->z;
    SimilarityReport report = score_latent(query_latent);
    clock.charge_scoring();
    result.checks.push_back({step.index, report.p_max, report.argmax_id});

    if (!have_score || report.p_max > result.decision.p) {
      result.decision.p = report.p_max;
      result.decision.argmax_id = report.argmax_id;
      have_score = true;
    }
    const bool exceeds = report.p_max > config_.gamma;
    if (exceeds && !rejected) {
      rejected = true;
      result.decision.verdict = Verdict::Reject;
      result.decision.step_decided = step.index;
      result.ledger.t_score_ready = clock.now();
      if (config_.mode == FilterMode::EarlyStop) break;
    }
    if (!rejected) {
      result.decision.step_decided = step.index;
      result.ledger.t_score_ready = clock.now();
    }
  }

  const bool halted = rejected && config_.mode == FilterMode::EarlyStop;
  if (!halted) {
    while (!sampler.done()) {
      sampler.advance();
      clock.charge_step();
    }
    result.final_latent = sampler.state().z;
  }
  result.ledger.t_generation_end = clock.now();
  result.ledger.steps_executed = sampler.executed();
  result.ledger.steps_saved = steps_ - sampler.executed();
  return result;
}

FilterResult run_filtered(const ScenarioSpec& spec, const ReferenceIndex& index, const Encoder& encoder,
                          const Decoder& decoder, const FilterConfig& config) {
  return ContentFilter(index, encoder, decoder, config, spec.steps).run(spec);
}

FilterResult run_unfiltered_then_check(const ScenarioSpec& spec, const ReferenceIndex& index,
                                       const Encoder& encoder, const Decoder& decoder, double gamma,
                                       std::optional<CostModel> cost_model) {
  if (!std::isfinite(gamma) || gamma < -1.0 || gamma > 1.0) {
    throw InvalidArgument("gamma must be finite and lie in [-1, 1]");
  }
  if (encoder.output_dim() != index.dim()) throw InvalidArgument("encoder output dim != index dim");

  LedgerClock clock(cost_model);
  FilterResult result;
  result.ledger.t_start = clock.now();
  EulerSampler sampler(spec);
  while (!sampler.done()) {
    sampler.advance();
    clock.charge_step();
  }
  result.ledger.t_generation_end = clock.now();
  result.final_latent = sampler.state().z;

  const SimilarityReport report = score(index, encoder(decoder(*result.final_latent)));
  clock.charge_scoring();
  result.ledger.t_score_ready = clock.now();
  result.ledger.steps_executed = sampler.executed();
  result.ledger.steps_saved = 0;
  result.checks.push_back({spec.steps, report.p_max, report.argmax_id});
  result.decision = {report.p_max > gamma ? Verdict::Reject : Verdict::Accept, report.p_max, spec.steps,
                     report.argmax_id};
  return result;
}

}  // namespace stepguard
