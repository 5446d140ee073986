#include "stepguard/records.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "stepguard/errors.hpp"

namespace stepguard {
namespace {

using nlohmann::json;

double to_ms(Duration d) { return static_cast<double>(d.count()) / 1e6; }

template <typename Fn>
auto for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line.front() == '#') continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(number, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(number, e.what());
    }
  }
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "reject") return Verdict::Reject;
  if (s == "accept") return Verdict::Accept;
  throw InvalidArgument("unknown verdict '" + s + "'");
}

}  // namespace

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::uint64_t parse_hex64(const std::string& text) {
  std::size_t used = 0;
  const auto value = std::stoull(text, &used, 16);
  if (used != text.size()) throw InvalidArgument("bad hex value '" + text + "'");
  return value;
}

RunRecord make_record(const ScenarioSpec& spec, const FilterResult& filtered, const FilterResult* baseline) {
  RunRecord r;
  r.scenario_id = spec.id;
  r.label = spec.label;
  r.p = filtered.decision.p;
  r.verdict = filtered.decision.verdict;
  r.step_decided = filtered.decision.step_decided;
  r.argmax_id = filtered.decision.argmax_id;
  r.steps_executed = filtered.ledger.steps_executed;
  r.steps_saved = filtered.ledger.steps_saved;
  r.latency_ms = to_ms(filtered.ledger.latency());
  r.generation_ms = to_ms(filtered.ledger.t_generation_end - filtered.ledger.t_start);
  r.checks = filtered.checks;
  if (filtered.final_latent) r.final_latent_hash = latent_hash(*filtered.final_latent);
  if (baseline) {
    r.baseline_latency_ms = to_ms(baseline->ledger.latency());
    if (baseline->final_latent) r.baseline_final_hash = latent_hash(*baseline->final_latent);
  }
  return r;
}

void write_records(std::ostream& out, std::span<const RunRecord> records) {
  for (const auto& r : records) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"step", c.step}, {"p", c.p}, {"argmax_id", c.argmax_id}});
    json j = {
        {"scenario", r.scenario_id},
        {"label", r.label},
        {"p", r.p},
        {"verdict", to_string(r.verdict)},
        {"step_decided", r.step_decided},
        {"argmax_id", r.argmax_id},
        {"steps_executed", r.steps_executed},
        {"steps_saved", r.steps_saved},
        {"latency_ms", r.latency_ms},
        {"generation_ms", r.generation_ms},
        {"checks", std::move(checks)},
        {"final_latent_hash", r.final_latent_hash ? json(hex64(*r.final_latent_hash)) : json(nullptr)},
    };
    if (r.baseline_latency_ms) j["baseline_latency_ms"] = *r.baseline_latency_ms;
    if (r.baseline_final_hash) j["baseline_final_hash"] = hex64(*r.baseline_final_hash);
    out << j.dump() << '\n';
  }
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  for_each_line(in, [&](const json& j) {
    RunRecord r;
    r.scenario_id = j.at("scenario").get<std::string>();
    r.label = j.at("label").get<int>();
    if (r.label != 0 && r.label != 1) throw InvalidArgument("label must be 0 or 1");
    r.p = j.at("p").get<double>();
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.step_decided = j.at("step_decided").get<int>();
    r.argmax_id = j.value("argmax_id", std::string{});
    r.steps_executed = j.value("steps_executed", 0);
    r.steps_saved = j.value("steps_saved", 0);
    r.latency_ms = j.value("latency_ms", 0.0);
    r.generation_ms = j.value("generation_ms", 0.0);
    if (j.contains("checks")) {
      for (const auto& c : j.at("checks")) {
        r.checks.push_back({c.at("step").get<int>(), c.at("p").get<double>(), c.value("argmax_id", std::string{})});
      }
    }
    if (j.contains("final_latent_hash") && !j.at("final_latent_hash").is_null()) {
      r.final_latent_hash = parse_hex64(j.at("final_latent_hash").get<std::string>());
    }
    if (j.contains("baseline_latency_ms")) r.baseline_latency_ms = j.at("baseline_latency_ms").get<double>();
    if (j.contains("baseline_final_hash")) r.baseline_final_hash = parse_hex64(j.at("baseline_final_hash").get<std::string>());
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<EvalSample> to_samples(std::span<const RunRecord> records) {
  std::vector<EvalSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.label, r.p});
  return out;
}

void write_suite(std::ostream& out, std::span<const ScenarioSpec> scenarios) {
  for (const auto& s : scenarios) {
    json target = json::array();
    for (Eigen::Index i = 0; i < s.oracle.target.size(); ++i) target.push_back(s.oracle.target[i]);
    json j = {
        {"id", s.id},
        {"seed", s.seed},
        {"label", s.label},
        {"steps", s.steps},
        {"latent_dim", s.latent_dim},
        {"target_ref", s.target_ref},
        {"oracle",
         {{"kind", to_string(s.oracle.kind)},
          {"noise_scale", s.oracle.noise_scale},
          {"decay", s.oracle.decay},
          {"seed", s.oracle.seed},
          {"target", std::move(target)}}},
    };
    out << j.dump() << '\n';
  }
}

std::vector<ScenarioSpec> read_suite(std::istream& in) {
  std::vector<ScenarioSpec> out;
  for_each_line(in, [&](const json& j) {
    ScenarioSpec s;
    s.id = j.at("id").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.label = j.at("label").get<int>();
    s.steps = j.at("steps").get<int>();
    s.latent_dim = j.at("latent_dim").get<int>();
    s.target_ref = j.value("target_ref", std::string{});
    const auto& o = j.at("oracle");
    s.oracle.kind = oracle_kind_from_string(o.at("kind").get<std::string>());
    s.oracle.noise_scale = o.value("noise_scale", 0.0);
    s.oracle.decay = o.value("decay", 1.0);
    s.oracle.seed = o.value("seed", std::uint64_t{0});
    const auto& target = o.at("target");
    s.oracle.target.resize(static_cast<Eigen::Index>(target.size()));
    for (std::size_t i = 0; i < target.size(); ++i) s.oracle.target[static_cast<Eigen::Index>(i)] = target[i].get<double>();
    validate(s);
    out.push_back(std::move(s));
  });
  return out;
}

}  // namespace stepguard
