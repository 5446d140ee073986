#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "stepguard/bench.hpp"
#include "stepguard/errors.hpp"
#include "stepguard/filter_engine.hpp"
#include "stepguard/metrics.hpp"
#include "stepguard/records.hpp"
#include "stepguard/ref_index.hpp"

namespace stepguard::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kOutDirEnv = "STEPGUARD_OUT_DIR";

/// Input problem that maps to exit code 2.
class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EncoderOptions {
  std::string kind = "randproj";
  int embed_dim = 256;
  std::uint64_t seed = 11;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--encoder", kind, "Encoder: identity | downsample | randproj")->capture_default_str();
    cmd.add_option("--embed-dim", embed_dim, "Embedding dimension d")->capture_default_str();
    cmd.add_option("--encoder-seed", seed, "Seed of the random projection")->capture_default_str();
  }
  Encoder make(int input_dim) const {
    EncoderSpec spec{encoder_kind_from_string(kind), embed_dim, seed};
    if (spec.kind == EncoderKind::Identity) spec.out_dim = 0;
    return Encoder(spec, input_dim);
  }
  json to_json() const { return {{"encoder", kind}, {"embed_dim", embed_dim}, {"encoder_seed", seed}}; }
};

fs::path resolve_out_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return ".";
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UserError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UserError("cannot write '" + path.string() + "'");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot read '" + path.string() + "'");
  return in;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Everything except `created_at` is a pure function of the inputs.
void write_manifest(const fs::path& dir, const std::string& command, json parameters, json outputs,
                    const std::string& config_path) {
  json manifest = {
      {"command", command},
      {"version", kVersion},
      {"config_file", config_path},
      {"output_dir", dir.string()},
      {"parameters", std::move(parameters)},
      {"outputs", std::move(outputs)},
      {"created_at", utc_now()},
  };
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';
}

Eigen::VectorXd read_vector_file(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw UserError("'" + path.string() + "': not a number: '" + token + "'");
    }
  }
  if (values.empty()) throw UserError("'" + path.string() + "' holds no values");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

void write_vector_file(const fs::path& path, const Eigen::VectorXd& v) {
  std::ofstream out = open_out(path);
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << (i + 1 == v.size() ? '\n' : ' ');
}

/// Raw-vector directory: every *.vec file below `dir`, id = relative path
/// without extension, in lexicographic order of ids.
std::vector<Embedding> read_vector_dir(const fs::path& dir) {
  std::vector<Embedding> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".vec") continue;
    fs::path rel = fs::relative(entry.path(), dir);
    rel.replace_extension();
    out.push_back({rel.generic_string(), read_vector_file(entry.path())});
  }
  if (out.empty()) throw UserError("no .vec files found in '" + dir.string() + "'");
  std::sort(out.begin(), out.end(), [](const Embedding& a, const Embedding& b) { return a.id < b.id; });
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UserError("bad integer '" + part + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw UserError("empty list");
  return out;
}

}  // namespace

/// "10:140:10" -> {10, 20, ..., 140}; "10,50,140" -> {10, 50, 140}.
std::vector<int> parse_sizes(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_int_list(text);
  std::vector<int> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(parse_int_list(part).front());
  if (parts.size() != 3 || parts[2] <= 0 || parts[0] < 1 || parts[1] < parts[0]) {
    throw UserError("size range must be start:stop:step with 1 <= start <= stop and step > 0");
  }
  std::vector<int> out;
  for (int n = parts[0]; n <= parts[1]; n += parts[2]) out.push_back(n);
  return out;
}

namespace {

int cmd_build_index(const std::string& input, const std::string& out_path, std::ostream& out) {
  const fs::path in_path(input);
  if (!fs::exists(in_path)) throw UserError("'" + input + "' does not exist");
  ReferenceIndex index = fs::is_directory(in_path) ? build_index(read_vector_dir(in_path)) : load_index(in_path);
  save_index(index, out_path);
  const auto bytes = serialize_index(index);
  out << "n=" << index.size() << " d=" << index.dim() << " checksum=" << hex64(stored_checksum(bytes)) << '\n';
  return kOk;
}

struct GenSuiteOptions {
  SuiteOptions suite;
  std::string oracle = "perturbed";
  EncoderOptions encoder;
  std::string out;
};

int cmd_gen_suite(GenSuiteOptions opts, const std::string& config, std::ostream& out) {
  opts.suite.oracle = oracle_kind_from_string(opts.oracle);
  const BenchmarkSuite suite = make_benchmark_suite(opts.suite);
  const Encoder encoder = opts.encoder.make(opts.suite.latent_dim);
  const fs::path dir = resolve_out_dir(opts.out);
  ensure_dir(dir / "refs");
  {
    std::ofstream suite_out = open_out(dir / "suite.jsonl");
    write_suite(suite_out, suite.scenarios);
  }
  for (const auto& entry : suite.corpus) {
    const fs::path path = dir / "refs" / (entry.id + ".vec");
    ensure_dir(path.parent_path());
    write_vector_file(path, encoder(entry.latent));
  }
  json params = opts.encoder.to_json();
  params.update({{"corpus_size", opts.suite.corpus_size},
                 {"scenarios", suite.scenarios.size()},
                 {"matched_fraction", opts.suite.matched_fraction},
                 {"latent_dim", opts.suite.latent_dim},
                 {"steps", opts.suite.steps},
                 {"oracle", opts.oracle},
                 {"noise_scale", opts.suite.noise_scale},
                 {"decay", opts.suite.decay},
                 {"seed", opts.suite.seed}});
  write_manifest(dir, "gen-suite", params, {"suite.jsonl", "refs/"}, config);
  out << "scenarios=" << suite.scenarios.size() << " corpus=" << suite.corpus.size() << " out=" << dir.string()
      << '\n';
  return kOk;
}

struct RunOptions {
  std::string index;
  std::string suite;
  double gamma = 0.0;
  std::string check_steps = "1";
  std::string mode = "early-stop";
  EncoderOptions encoder;
  bool no_xpred = false;
  bool wall_clock = false;
  double step_cost_ms = 10.0;
  double score_overhead_ms = 2.0;
  std::string out;
};

int cmd_run(const RunOptions& opts, const std::string& config, std::ostream& out) {
  if (!fs::exists(opts.index)) throw UserError("index file '" + opts.index + "' does not exist");
  const ReferenceIndex index = load_index(opts.index);
  std::ifstream suite_in = open_in(opts.suite);
  const std::vector<ScenarioSpec> scenarios = read_suite(suite_in);
  if (scenarios.empty()) throw UserError("scenario suite '" + opts.suite + "' is empty");

  const int steps = scenarios.front().steps;
  const int latent_dim = scenarios.front().latent_dim;
  const Encoder encoder = opts.encoder.make(latent_dim);
  const Decoder decoder;

  FilterConfig cfg;
  cfg.gamma = opts.gamma;
  cfg.check_steps = parse_int_list(opts.check_steps);
  cfg.mode = filter_mode_from_string(opts.mode);
  cfg.use_xpred = !opts.no_xpred;
  if (!opts.wall_clock) {
    auto to_ns = [](double ms) { return Duration(static_cast<std::int64_t>(std::llround(ms * 1e6))); };
    cfg.cost_model = CostModel{to_ns(opts.step_cost_ms), to_ns(opts.score_overhead_ms)};
  }
  const ContentFilter filter(index, encoder, decoder, cfg, steps);

  std::vector<RunRecord> records;
  records.reserve(scenarios.size());
  std::size_t rejected = 0;
  for (const auto& spec : scenarios) {
    if (spec.steps != steps || spec.latent_dim != latent_dim) {
      throw UserError("scenario '" + spec.id + "' differs in steps or latent_dim from the first scenario");
    }
    const FilterResult filtered = filter.run(spec);
    const FilterResult baseline = run_unfiltered_then_check(spec, index, encoder, decoder, cfg.gamma, cfg.cost_model);
    records.push_back(make_record(spec, filtered, &baseline));
    if (filtered.decision.verdict == Verdict::Reject) ++rejected;
  }

  const fs::path dir = resolve_out_dir(opts.out);
  ensure_dir(dir);
  {
    std::ofstream rec_out = open_out(dir / "records.jsonl");
    write_records(rec_out, records);
  }
  json params = opts.encoder.to_json();
  params.update({{"index", opts.index},
                 {"scenario_suite", opts.suite},
                 {"gamma", opts.gamma},
                 {"check_steps", cfg.check_steps},
                 {"mode", to_string(cfg.mode)},
                 {"xpred", cfg.use_xpred},
                 {"clock", opts.wall_clock ? "wall" : "cost-model"},
                 {"step_cost_ms", opts.step_cost_ms},
                 {"score_overhead_ms", opts.score_overhead_ms},
                 {"scenario_seeds", [&] {
                    json seeds = json::array();
                    for (const auto& s : scenarios) seeds.push_back(s.seed);
                    return seeds;
                  }()}});
  write_manifest(dir, "run", params, {"records.jsonl"}, config);
  out << "runs=" << records.size() << " rejected=" << rejected << " out=" << dir.string() << '\n';
  return kOk;
}

int cmd_eval(const std::string& records_path, const std::string& out_flag, const std::string& thresholds,
             const std::string& config, std::ostream& out) {
  std::ifstream in = open_in(records_path);
  std::vector<RunRecord> records;
  try {
    records = read_records(in);
  } catch (const ParseError& e) {
    throw UserError(records_path + ": " + e.what());
  }
  const auto samples = to_samples(records);
  const CurveSummary summary = summarize(samples);
  std::vector<double> grid = default_threshold_grid();
  if (!thresholds.empty()) {
    grid.clear();
    std::stringstream ss(thresholds);
    std::string part;
    while (std::getline(ss, part, ',')) {
      try {
        grid.push_back(std::stod(part));
      } catch (const std::exception&) {
        throw UserError("bad threshold '" + part + "'");
      }
    }
  }
  const auto sweep = threshold_sweep(samples, grid);

  const fs::path dir = resolve_out_dir(out_flag);
  ensure_dir(dir);
  json sweep_json = json::array();
  for (const auto& t : sweep) sweep_json.push_back({{"threshold", t.threshold}, {"accuracy", t.accuracy}});
  std::size_t positives = 0;
  for (const auto& s : samples) positives += static_cast<std::size_t>(s.label);
  json summary_json = {{"records", samples.size()},
                       {"positives", positives},
                       {"roc_auc", summary.roc_auc},
                       {"pr_auc", summary.pr_auc},
                       {"threshold_accuracy", std::move(sweep_json)}};
  open_out(dir / "summary.json") << summary_json.dump(2) << '\n';
  {
    std::ofstream curve = open_out(dir / "curve.tsv");
    curve << std::setprecision(17) << "threshold\ttpr\tfpr\tprecision\trecall\taccuracy\n";
    for (const auto& p : summary.curve_points) {
      curve << p.threshold << '\t' << p.tpr << '\t' << p.fpr << '\t' << p.precision << '\t' << p.recall << '\t'
            << p.accuracy << '\n';
    }
  }
  write_manifest(dir, "eval", {{"records", records_path}, {"thresholds", grid}}, {"summary.json", "curve.tsv"},
                 config);
  out << "roc_auc=" << summary.roc_auc << " pr_auc=" << summary.pr_auc << '\n';
  return kOk;
}

int cmd_bench_scalability(ScalabilityOptions opts, const std::string& sizes, const std::string& out_flag,
                          const std::string& config, std::ostream& out) {
  opts.sizes = parse_sizes(sizes);
  const auto records = run_scalability(opts);
  const fs::path dir = resolve_out_dir(out_flag);
  ensure_dir(dir);
  {
    std::ofstream table = open_out(dir / "scalability.tsv");
    write_scalability_table(table, records);
  }
  write_manifest(dir, "bench-scalability",
                 {{"sizes", opts.sizes},
                  {"latent_dim", opts.latent_dim},
                  {"embed_dim", opts.embed_dim},
                  {"steps", opts.steps},
                  {"check_step", opts.check_step},
                  {"noise_scale", opts.noise_scale},
                  {"gamma", opts.gamma},
                  {"latency_calls", opts.latency_calls},
                  {"naive_calls", opts.naive_calls},
                  {"seed", opts.seed}},
                 {"scalability.tsv"}, config);
  write_scalability_table(out, records);
  return kOk;
}

int cmd_bench_ablation(GenSuiteOptions opts, const std::string& config, std::ostream& out) {
  opts.suite.oracle = oracle_kind_from_string(opts.oracle);
  const BenchmarkSuite suite = make_benchmark_suite(opts.suite);
  const Encoder encoder = opts.encoder.make(opts.suite.latent_dim);
  const Decoder decoder;
  const ReferenceIndex index = build_corpus_index(suite.corpus, encoder, decoder);
  const AblationResult result = run_ablation(suite, index, encoder, decoder);

  const fs::path dir = resolve_out_dir(opts.out);
  ensure_dir(dir);
  {
    std::ofstream table = open_out(dir / "ablation.tsv");
    write_ablation_table(table, result);
  }
  json params = opts.encoder.to_json();
  params.update({{"corpus_size", opts.suite.corpus_size},
                 {"scenarios", suite.scenarios.size()},
                 {"latent_dim", opts.suite.latent_dim},
                 {"steps", opts.suite.steps},
                 {"oracle", opts.oracle},
                 {"noise_scale", opts.suite.noise_scale},
                 {"seed", opts.suite.seed}});
  write_manifest(dir, "bench-ablation", params, {"ablation.tsv"}, config);
  write_ablation_table(out, result);
  return kOk;
}

void add_suite_options(CLI::App& cmd, GenSuiteOptions& o) {
  cmd.add_option("--corpus-size", o.suite.corpus_size, "Number of reference latents")->capture_default_str();
  cmd.add_option("--scenarios", o.suite.num_scenarios, "Scenario count (0: corpus size)")->capture_default_str();
  cmd.add_option("--matched-fraction", o.suite.matched_fraction, "Share of label-1 scenarios")->capture_default_str();
  cmd.add_option("--latent-dim", o.suite.latent_dim, "Latent dimension")->capture_default_str();
  cmd.add_option("--steps", o.suite.steps, "Sampler steps K")->capture_default_str();
  cmd.add_option("--oracle", o.oracle, "exact | perturbed | distractor")->capture_default_str();
  cmd.add_option("--noise-scale", o.suite.noise_scale, "Perturbed oracle noise scale")->capture_default_str();
  cmd.add_option("--decay", o.suite.decay, "Perturbation decay exponent in [0, 1]")->capture_default_str();
  cmd.add_option("--seed", o.suite.seed, "Suite seed")->capture_default_str();
  o.encoder.add_to(cmd);
  cmd.add_option("--out", o.out, "Output directory (default: $STEPGUARD_OUT_DIR or .)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"In-loop reference-similarity content filter for flow-matching samplers"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags win");
  app.require_subcommand(1);

  std::string bi_input, bi_out;
  auto* build = app.add_subcommand("build-index", "Build or re-validate a reference index file");
  build->add_option("--embeddings", bi_input, "Index file or directory of .vec files")->required();
  build->add_option("--out", bi_out, "Output index path")->required();

  GenSuiteOptions gen;
  gen.suite.noise_scale = 0.5;
  auto* gen_cmd = app.add_subcommand("gen-suite", "Generate a scenario suite and reference vectors");
  add_suite_options(*gen_cmd, gen);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run the filter over a scenario suite");
  run_cmd->add_option("--index", run_opts.index, "Reference index file")->required();
  run_cmd->add_option("--scenario-suite", run_opts.suite, "Scenario suite (.jsonl)")->required();
  run_cmd->add_option("--gamma", run_opts.gamma, "Rejection threshold on p")->required();
  run_cmd->add_option("--check-steps", run_opts.check_steps, "Comma-separated 1-based steps")->capture_default_str();
  run_cmd->add_option("--mode", run_opts.mode, "early-stop | score-only")->capture_default_str();
  run_opts.encoder.add_to(*run_cmd);
  run_cmd->add_flag("--no-xpred", run_opts.no_xpred, "Score the raw latent instead of the x-pred estimate");
  run_cmd->add_flag("--wall-clock", run_opts.wall_clock, "Measure latency with the steady clock");
  run_cmd->add_option("--step-cost-ms", run_opts.step_cost_ms, "Cost-model time per step")->capture_default_str();
  run_cmd->add_option("--score-overhead-ms", run_opts.score_overhead_ms, "Cost-model time per score")
      ->capture_default_str();
  run_cmd->add_option("--out", run_opts.out, "Output directory (default: $STEPGUARD_OUT_DIR or .)");

  std::string ev_records, ev_out, ev_thresholds;
  auto* eval_cmd = app.add_subcommand("eval", "Compute ROC/PR summaries from run records");
  eval_cmd->add_option("--records", ev_records, "records.jsonl from `run`")->required();
  eval_cmd->add_option("--thresholds", ev_thresholds, "Comma-separated gamma grid (default 0.1..0.9)");
  eval_cmd->add_option("--out", ev_out, "Output directory (default: $STEPGUARD_OUT_DIR or .)");

  ScalabilityOptions sc;
  std::string sc_sizes = "10:140:10", sc_out;
  auto* sc_cmd = app.add_subcommand("bench-scalability", "Latency and AUC versus reference count");
  sc_cmd->add_option("--sizes", sc_sizes, "start:stop:step or comma list")->capture_default_str();
  sc_cmd->add_option("--latent-dim", sc.latent_dim)->capture_default_str();
  sc_cmd->add_option("--embed-dim", sc.embed_dim)->capture_default_str();
  sc_cmd->add_option("--calls", sc.latency_calls, "Timed cached-index calls per size")->capture_default_str();
  sc_cmd->add_option("--naive-calls", sc.naive_calls, "Timed naive calls per size")->capture_default_str();
  sc_cmd->add_option("--seed", sc.seed)->capture_default_str();
  sc_cmd->add_option("--out", sc_out, "Output directory (default: $STEPGUARD_OUT_DIR or .)");

  GenSuiteOptions ab;
  ab.suite.corpus_size = 20;
  ab.suite.num_scenarios = 200;
  ab.suite.noise_scale = 0.5;
  auto* ab_cmd = app.add_subcommand("bench-ablation", "Per-step ROC-AUC with and without x-pred");
  add_suite_options(*ab_cmd, ab);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUserError;
  }

  const std::string config = app.get_config_ptr()->count() ? app.get_config_ptr()->as<std::string>() : "";
  try {
    if (*build) return cmd_build_index(bi_input, bi_out, out);
    if (*gen_cmd) return cmd_gen_suite(gen, config, out);
    if (*run_cmd) return cmd_run(run_opts, config, out);
    if (*eval_cmd) return cmd_eval(ev_records, ev_out, ev_thresholds, config, out);
    if (*sc_cmd) return cmd_bench_scalability(sc, sc_sizes, sc_out, config, out);
    if (*ab_cmd) return cmd_bench_ablation(ab, config, out);
  } catch (const IndexError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    switch (e.kind()) {
      case IndexErrorKind::ChecksumMismatch:
      case IndexErrorKind::InvariantViolation:
        return kIntegrityError;
      default:
        return kUserError;
    }
  } catch (const UserError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const RetryBudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kUserError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace stepguard::cli
