#pragma once

// Line-delimited JSON formats: scenario suites (one ScenarioSpec per line) and
// filter run records (one run per line).

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stepguard/filter_engine.hpp"
#include "stepguard/metrics.hpp"
#include "stepguard/sampler.hpp"

namespace stepguard {

struct RunRecord {
  std::string scenario_id;
  int label = 0;
  double p = 0.0;
  Verdict verdict = Verdict::Accept;
  int step_decided = 0;
  std::string argmax_id;
  int steps_executed = 0;
  int steps_saved = 0;
  double latency_ms = 0.0;     // t_score_ready - t_start
  double generation_ms = 0.0;  // t_generation_end - t_start
  std::vector<CheckRecord> checks;
  std::optional<std::uint64_t> final_latent_hash;
  std::optional<double> baseline_latency_ms;
  std::optional<std::uint64_t> baseline_final_hash;
};

RunRecord make_record(const ScenarioSpec& spec, const FilterResult& filtered,
                      const FilterResult* baseline = nullptr);

void write_records(std::ostream& out, std::span<const RunRecord> records);
/// Throws ParseError carrying the 1-based line number of the first bad line.
std::vector<RunRecord> read_records(std::istream& in);

std::vector<EvalSample> to_samples(std::span<const RunRecord> records);

void write_suite(std::ostream& out, std::span<const ScenarioSpec> scenarios);
std::vector<ScenarioSpec> read_suite(std::istream& in);

std::string hex64(std::uint64_t value);
std::uint64_t parse_hex64(const std::string& text);

}  // namespace stepguard
