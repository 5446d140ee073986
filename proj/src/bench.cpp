#include "stepguard/bench.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <ostream>
#include <thread>

#include "stepguard/errors.hpp"

namespace stepguard {
namespace {

/// Runs fn(i) for i in [0, n) over the available hardware threads.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

double ms(Duration d) { return static_cast<double>(d.count()) / 1e6; }

}  // namespace

ReferenceIndex build_corpus_index(std::span<const CorpusEntry> corpus, const Encoder& encoder,
                                  const Decoder& decoder) {
  std::vector<Embedding> embeddings;
  embeddings.reserve(corpus.size());
  for (const auto& entry : corpus) embeddings.push_back(encode(decode(entry.latent, decoder), encoder, entry.id));
  return build_index(embeddings, encoder.fingerprint());
}

double naive_reference_scan(std::span<const CorpusEntry> corpus, const Encoder& encoder,
                            const Decoder& decoder, const Eigen::VectorXd& query_latent) {
  const Eigen::VectorXd query = encoder(decoder(query_latent));
  const double query_norm = query.norm();
  if (query_norm == 0.0) throw InvalidArgument("cannot score a zero-norm query");
  double best = -2.0;
  for (const auto& entry : corpus) {
    const Eigen::VectorXd ref = encoder(decoder(entry.latent));
    best = std::max(best, ref.dot(query) / (ref.norm() * query_norm));
  }
  return best;
}

const AblationRow& AblationResult::at(int step, bool xpred) const {
  for (const auto& row : rows) {
    if (row.step == step && row.xpred == xpred) return row;
  }
  throw InvalidArgument("no ablation row for step " + std::to_string(step));
}

AblationResult run_ablation(const BenchmarkSuite& suite, const ReferenceIndex& index, const Encoder& encoder,
                            const Decoder& decoder, std::span<const int> steps) {
  if (suite.scenarios.empty()) throw InvalidArgument("ablation needs at least one scenario");
  const int k = suite.scenarios.front().steps;
  std::vector<int> grid(steps.begin(), steps.end());
  if (grid.empty()) {
    for (int i = 1; i <= k; ++i) grid.push_back(i);
  }
  for (int s : grid) {
    if (s < 1 || s > k) throw InvalidArgument("ablation step " + std::to_string(s) + " outside [1, K]");
  }

  for (const auto& spec : suite.scenarios) {
    if (spec.steps != k) throw InvalidArgument("ablation scenarios must share one step count");
  }

  const Schedule schedule;
  const std::size_t n = suite.scenarios.size();
  // scores[scenario][grid position][variant]
  std::vector<std::vector<std::array<double, 2>>> scores(n, std::vector<std::array<double, 2>>(grid.size()));
  parallel_for(n, [&](std::size_t s) {
    const auto& spec = suite.scenarios[s];
    const Trajectory traj = run_trajectory(spec);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto i = static_cast<std::size_t>(grid[g]);
      const Eigen::VectorXd estimate =
          x_pred(traj.states[i - 1], Prediction<double>{PredictionKind::Velocity, traj.velocities[i - 1]}, schedule);
      scores[s][g][1] = score(index, encoder(decoder(estimate))).p_max;
      scores[s][g][0] = score(index, encoder(decoder(traj.states[i].z))).p_max;
    }
  });

  AblationResult result;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (bool xpred : {true, false}) {
      AblationRow row;
      row.step = grid[g];
      row.xpred = xpred;
      row.samples.reserve(n);
      for (std::size_t s = 0; s < n; ++s) row.samples.push_back({suite.scenarios[s].label, scores[s][g][xpred ? 1 : 0]});
      row.summary = summarize(row.samples);
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

void write_ablation_table(std::ostream& out, const AblationResult& result) {
  out << "step\tvariant\troc_auc\tpr_auc\n";
  for (const auto& row : result.rows) {
    out << row.step << '\t' << (row.xpred ? "xpred" : "raw") << '\t' << row.summary.roc_auc << '\t'
        << row.summary.pr_auc << '\n';
  }
}

std::vector<int> default_scalability_sizes() {
  std::vector<int> sizes;
  for (int n = 10; n <= 140; n += 10) sizes.push_back(n);
  return sizes;
}

Duration median(std::vector<Duration> values) {
  if (values.empty()) throw InvalidArgument("median of an empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

std::vector<ScalabilityRecord> run_scalability(const ScalabilityOptions& options) {
  const std::vector<int> sizes = options.sizes.empty() ? default_scalability_sizes() : options.sizes;
  if (options.latency_calls < 1 || options.naive_calls < 1) throw InvalidArgument("latency call counts must be >= 1");

  const Encoder encoder(EncoderSpec{EncoderKind::RandomProjection, options.embed_dim, options.seed}, options.latent_dim);
  const Decoder decoder;
  const Schedule schedule;
  using clock = std::chrono::steady_clock;

  std::vector<ScalabilityRecord> records;
  for (int n : sizes) {
    SuiteOptions suite_options;
    suite_options.corpus_size = n;
    suite_options.num_scenarios = 2 * n;
    suite_options.matched_fraction = 0.5;
    suite_options.latent_dim = options.latent_dim;
    suite_options.steps = options.steps;
    suite_options.oracle = OracleKind::Perturbed;
    suite_options.noise_scale = options.noise_scale;
    suite_options.seed = options.seed + static_cast<std::uint64_t>(n);
    const BenchmarkSuite suite = make_benchmark_suite(suite_options);
    const ReferenceIndex index = build_corpus_index(suite.corpus, encoder, decoder);

    FilterConfig config;
    config.gamma = options.gamma;
    config.check_steps = {options.check_step};
    config.mode = FilterMode::EarlyStop;
    const ContentFilter filter(index, encoder, decoder, config, options.steps);

    ScalabilityRecord record;
    record.n_refs = n;

    std::vector<EvalSample> samples(suite.scenarios.size());
    parallel_for(suite.scenarios.size(), [&](std::size_t i) {
      samples[i] = {suite.scenarios[i].label, filter.run(suite.scenarios[i]).decision.p};
    });
    record.roc_auc = roc_auc(samples);

    // Timings below run on this thread only.
    std::vector<Duration> end_to_end;
    std::vector<Eigen::VectorXd> queries;
    for (const auto& spec : suite.scenarios) {
      end_to_end.push_back(filter.run(spec).ledger.latency());
      EulerSampler sampler(spec);
      EulerSampler::Step step = sampler.advance();
      while (step.index < options.check_step) step = sampler.advance();
      queries.push_back(x_pred(step.before, Prediction<double>{PredictionKind::Velocity, step.velocity}, schedule));
    }
    record.median_end_to_end_latency = median(std::move(end_to_end));

    double sink = 0.0;
    std::vector<Duration> cached, matvec, naive;
    cached.reserve(static_cast<std::size_t>(options.latency_calls));
    for (int c = 0; c < options.latency_calls; ++c) {
      const auto& q = queries[static_cast<std::size_t>(c) % queries.size()];
      const auto t0 = clock::now();
      sink += filter.score_latent(q).p_max;
      cached.push_back(clock::now() - t0);
    }
    for (int c = 0; c < options.latency_calls; ++c) {
      const Eigen::VectorXd e = encoder(decoder(queries[static_cast<std::size_t>(c) % queries.size()]));
      const auto t0 = clock::now();
      sink += score(index, e).p_max;
      matvec.push_back(clock::now() - t0);
    }
    for (int c = 0; c < options.naive_calls; ++c) {
      const auto& q = queries[static_cast<std::size_t>(c) % queries.size()];
      const auto t0 = clock::now();
      sink += naive_reference_scan(suite.corpus, encoder, decoder, q);
      naive.push_back(clock::now() - t0);
    }
    volatile double observed = sink;
    (void)observed;
    record.median_score_latency = median(std::move(cached));
    record.median_matvec_latency = median(std::move(matvec));
    record.median_naive_latency = median(std::move(naive));
    records.push_back(record);
  }
  return records;
}

void write_scalability_table(std::ostream& out, std::span<const ScalabilityRecord> records) {
  out << "n_refs\troc_auc\tscore_latency_ms\tend_to_end_latency_ms\tnaive_latency_ms\tmatvec_latency_ms\n";
  for (const auto& r : records) {
    out << r.n_refs << '\t' << r.roc_auc << '\t' << ms(r.median_score_latency) << '\t'
        << ms(r.median_end_to_end_latency) << '\t' << ms(r.median_naive_latency) << '\t'
        << ms(r.median_matvec_latency) << '\n';
  }
}

}  // namespace stepguard
