#pragma once

// Benchmark harnesses: per-step x-pred ablation curves and the
// reference-count scalability sweep.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stepguard/encoder.hpp"
#include "stepguard/filter_engine.hpp"
#include "stepguard/metrics.hpp"
#include "stepguard/ref_index.hpp"
#include "stepguard/sampler.hpp"

namespace stepguard {

/// Index over E(D(x)) for every corpus latent x.
ReferenceIndex build_corpus_index(std::span<const CorpusEntry> corpus, const Encoder& encoder,
                                  const Decoder& decoder);

/// Reference-at-a-time scoring that re-encodes every reference per query;
/// the uncached contrast for the scalability sweep.
double naive_reference_scan(std::span<const CorpusEntry> corpus, const Encoder& encoder,
                            const Decoder& decoder, const Eigen::VectorXd& query_latent);

struct AblationRow {
  int step = 0;
  bool xpred = false;
  CurveSummary summary;
  std::vector<EvalSample> samples;
};

struct AblationResult {
  std::vector<AblationRow> rows;

  const AblationRow& at(int step, bool xpred) const;
};

/// For each scenario and each step i in `steps` (empty: 1..K), scores the
/// x-pred estimate built from the i-th velocity evaluation and, separately,
/// the raw latent after i steps.
AblationResult run_ablation(const BenchmarkSuite& suite, const ReferenceIndex& index, const Encoder& encoder,
                            const Decoder& decoder, std::span<const int> steps = {});

void write_ablation_table(std::ostream& out, const AblationResult& result);

struct ScalabilityOptions {
  std::vector<int> sizes;  // empty: 10, 20, ..., 140
  int latent_dim = 256;
  int embed_dim = 512;
  int steps = kFewStepPreset;
  int check_step = 1;
  double noise_scale = 0.5;
  double gamma = 0.5;
  int latency_calls = 1000;
  int naive_calls = 1000;
  std::uint64_t seed = 7;
};

struct ScalabilityRecord {
  int n_refs = 0;
  double roc_auc = 0.0;
  Duration median_score_latency{};       // pseudo-clean latent -> p with the cached index
  Duration median_end_to_end_latency{};  // filtered run: start -> score ready
  Duration median_naive_latency{};       // same query, references re-encoded per call
  Duration median_matvec_latency{};      // score() alone on a pre-embedded query
};

std::vector<int> default_scalability_sizes();

std::vector<ScalabilityRecord> run_scalability(const ScalabilityOptions& options);

void write_scalability_table(std::ostream& out, std::span<const ScalabilityRecord> records);

/// Median of a sample of durations (upper median for even counts).
Duration median(std::vector<Duration> values);

}  // namespace stepguard
