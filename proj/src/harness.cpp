#include "clawguard/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "clawguard/digest.hpp"
#include "clawguard/memory_guard.hpp"
#include "clawguard/paths.hpp"
#include "clawguard/skill_auditor.hpp"

namespace clawguard::harness {
namespace fs = std::filesystem;

const std::vector<std::string> kTaxonomyRows = {
    "instruction_amnesia", "indirect_prompt_injection", "soft_backdoor", "sandbox_escape",
    "stac",                "supply_chain",              "clawjacked",    "plaintext_secrets"};

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::DETECTED: return "DETECTED";
    case Outcome::MISSED: return "MISSED";
    case Outcome::FALSE_BLOCK: return "FALSE_BLOCK";
    case Outcome::ERROR: return "ERROR";
  }
  return "ERROR";
}

nlohmann::json report_to_json(const ReplayReport& r) {
  return {{"scenario_id", r.scenario_id},
          {"taxonomy_ref", r.taxonomy_ref},
          {"outcome", std::string(outcome_name(r.outcome))},
          {"deciding_stage", r.deciding_stage},
          {"final_disposition", std::string(disposition_name(r.final_disposition))},
          {"finding_rules", r.finding_rules},
          {"transcript", r.transcript_path},
          {"detail", r.detail},
          {"mediate_calls", r.mediate_calls},
          {"telemetry_events", r.telemetry_events}};
}

Result<ReplayReport> report_from_json(const nlohmann::json& j) {
  ReplayReport r;
  if (!j.is_object() || !j.contains("scenario_id")) {
    return Result<ReplayReport>::failure("MALFORMED", "report requires scenario_id");
  }
  r.scenario_id = j["scenario_id"].get<std::string>();
  r.taxonomy_ref = j.value("taxonomy_ref", "");
  const std::string outcome = j.value("outcome", "ERROR");
  for (Outcome o : {Outcome::DETECTED, Outcome::MISSED, Outcome::FALSE_BLOCK, Outcome::ERROR}) {
    if (outcome_name(o) == outcome) r.outcome = o;
  }
  r.deciding_stage = j.value("deciding_stage", "");
  r.final_disposition =
      disposition_from_name(j.value("final_disposition", "ALLOW")).value_or(Disposition::ALLOW);
  if (j.contains("finding_rules")) {
    r.finding_rules = j["finding_rules"].get<std::vector<std::string>>();
  }
  r.transcript_path = j.value("transcript", "");
  r.detail = j.value("detail", "");
  r.mediate_calls = j.value("mediate_calls", std::size_t{0});
  r.telemetry_events = j.value("telemetry_events", std::size_t{0});
  return r;
}

Result<Scenario> scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("scenario_id") || !j.contains("taxonomy_ref") ||
      !j.contains("steps") || !j.contains("expectation")) {
    return Result<Scenario>::failure("MALFORMED_SCENARIO",
                                     "scenario requires id, taxonomy_ref, steps, expectation");
  }
  Scenario s;
  s.scenario_id = j["scenario_id"].get<std::string>();
  s.taxonomy_ref = j["taxonomy_ref"].get<std::string>();
  s.description = j.value("description", "");
  s.principal = j.value("principal", "");
  for (const auto& step : j["steps"]) {
    if (!step.contains("op")) {
      return Result<Scenario>::failure("MALFORMED_SCENARIO",
                                       s.scenario_id + ": step without op");
    }
    s.steps.push_back({step["op"].get<std::string>(), step});
  }
  const auto& e = j["expectation"];
  s.expectation.stage = e.value("stage", "");
  const auto disposition = disposition_from_name(e.value("disposition", "ALLOW"));
  if (!disposition) {
    return Result<Scenario>::failure("MALFORMED_SCENARIO",
                                     s.scenario_id + ": bad expectation disposition");
  }
  s.expectation.disposition = *disposition;
  s.expectation.rule_prefix = e.value("rule_prefix", "");
  return s;
}

Result<Corpus> load_corpus(const std::string& corpus_dir) {
  Corpus corpus;
  corpus.root = corpus_dir;

  const auto config_path = fs::path(corpus_dir) / "config.json";
  auto config = gateway::load_config_file(config_path.string());
  if (!config.ok()) {
    return Result<Corpus>::failure(config.error().code,
                                   "corpus config: " + config.error().message);
  }
  corpus.gateway_config = config.take();

  const auto profile_dir = fs::path(corpus_dir) / "profiles";
  if (fs::is_directory(profile_dir)) {
    for (const auto& entry : fs::directory_iterator(profile_dir)) {
      if (entry.path().extension() != ".json") continue;
      auto profile = policy::load_profile_file(entry.path().string());
      if (!profile.ok()) {
        return Result<Corpus>::failure(profile.error().code,
                                       entry.path().filename().string() + ": " +
                                           profile.error().message);
      }
      corpus.profiles.push_back(profile.take());
    }
  }

  const auto scenario_dir = fs::path(corpus_dir) / "scenarios";
  if (!fs::is_directory(scenario_dir)) {
    return Result<Corpus>::failure("MALFORMED_SCENARIO", "no scenarios/ directory in corpus");
  }
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(scenario_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      return Result<Corpus>::failure("MALFORMED_SCENARIO", file + ": invalid json");
    }
    auto scenario = scenario_from_json(j);
    if (!scenario.ok()) {
      return Result<Corpus>::failure(scenario.error().code,
                                     file + ": " + scenario.error().message);
    }
    // fixtures must resolve inside the corpus root
    for (const auto& step : scenario.value().steps) {
      if (step.params.contains("fixture")) {
        const auto fixture = fs::path(corpus_dir) / step.params["fixture"].get<std::string>();
        if (!fs::exists(fixture)) {
          return Result<Corpus>::failure("MALFORMED_SCENARIO",
                                         scenario.value().scenario_id +
                                             ": missing fixture " + fixture.string());
        }
      }
    }
    corpus.scenarios.push_back(scenario.take());
  }

  int benign = 0;
  for (const auto& row : kTaxonomyRows) {
    const bool covered = std::any_of(corpus.scenarios.begin(), corpus.scenarios.end(),
                                     [&](const Scenario& s) { return s.taxonomy_ref == row; });
    if (!covered) {
      return Result<Corpus>::failure("MISSING_ROW_COVERAGE", "no scenario covers " + row);
    }
  }
  for (const auto& s : corpus.scenarios) {
    if (s.taxonomy_ref == "benign") ++benign;
  }
  if (benign < 3) {
    return Result<Corpus>::failure("MISSING_ROW_COVERAGE",
                                   "corpus needs at least 3 benign scenarios, found " +
                                       std::to_string(benign));
  }
  return corpus;
}

namespace {

struct PrincipalState {
  gateway::Connection conn;
  gateway::SessionDescriptor descriptor;
  std::uint64_t next_seq = 1;
};

struct StepVerdict {
  std::string stage;
  Disposition disposition = Disposition::ALLOW;
  std::vector<std::string> rules;
  bool is_error = false;
  std::string error_code;
};

class Transcript {
public:
  void record(std::string_view direction, const wire::Envelope& env) {
    lines_.push_back(nlohmann::json{{"dir", std::string(direction)},
                                    {"envelope", nlohmann::json::parse(
                                                     wire::envelope_to_json_text(env))}}
                         .dump());
  }
  void flush(const std::string& path) const {
    if (path.empty()) return;
    std::ofstream out(path, std::ios::trunc);
    for (const auto& line : lines_) out << line << "\n";
  }
  const std::vector<std::string>& lines() const { return lines_; }

private:
  std::vector<std::string> lines_;
};

std::string fixture_text(const Corpus& corpus, const nlohmann::json& params) {
  if (params.contains("fixture")) {
    std::ifstream in(fs::path(corpus.root) / params["fixture"].get<std::string>(),
                     std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }
  return params.value("content", "");
}

StepVerdict verdict_from_envelopes(const std::vector<wire::Envelope>& responses) {
  StepVerdict out;
  for (const auto& env : responses) {
    if (env.kind == wire::EnvelopeKind::ERROR) {
      out.is_error = true;
      out.error_code = env.payload.value("code", "");
      out.disposition = Disposition::DENY;
      return out;
    }
    if (env.kind == wire::EnvelopeKind::VERDICT) {
      const auto verdict = verdict_from_json(env.payload);
      out.stage = verdict.stage;
      out.disposition = verdict.disposition;
      for (const auto& f : verdict.findings) out.rules.push_back(f.rule_id);
    }
  }
  return out;
}

}  // namespace

ReplayReport replay(const Scenario& scenario, const Corpus& corpus, const RunOptions& options) {
  ReplayReport report;
  report.scenario_id = scenario.scenario_id;
  report.taxonomy_ref = scenario.taxonomy_ref;

  // deterministic per-scenario seed keeps replays reproducible
  const std::uint64_t seed =
      std::uint64_t{0x9e3779b9} ^ std::hash<std::string>{}(scenario.scenario_id);
  gateway::Gateway gw(corpus.gateway_config, {}, seed,
                      fixed_clock(std::chrono::system_clock::time_point{}));
  for (const auto& p : corpus.profiles) gw.put_profile(p);

  std::string transcript_path;
  std::string memory_dir;
  if (!options.run_dir.empty()) {
    fs::create_directories(fs::path(options.run_dir) / "transcripts");
    transcript_path =
        (fs::path(options.run_dir) / "transcripts" / (scenario.scenario_id + ".jsonl")).string();
    gw.telemetry().set_sink((fs::path(options.run_dir) / "telemetry.jsonl").string());
    gw.governance().set_sink((fs::path(options.run_dir) / "governance.jsonl").string());
    memory_dir = (fs::path(options.run_dir) / ("memory-" + scenario.scenario_id)).string();
    auto store = memory::MemoryStore::open(memory_dir);
    if (store.ok()) gw.memory_store() = store.take();
  }

  Transcript transcript;
  std::map<std::string, PrincipalState> principals;
  std::string current_principal = scenario.principal;

  std::optional<StepVerdict> last;
  bool any_deny = false;
  bool any_flag = false;
  bool harness_error = false;
  std::string error_detail;

  const auto find_secret = [&](const std::string& principal) -> const gateway::PairingToken* {
    for (const auto& t : corpus.gateway_config.pairing_tokens) {
      if (t.principal == principal) return &t;
    }
    return nullptr;
  };

  const auto send = [&](const std::string& principal,
                        wire::Envelope env) -> std::vector<wire::Envelope> {
    auto it = principals.find(principal);
    if (it == principals.end()) {
      harness_error = true;
      error_detail = "step before handshake for " + principal;
      return {};
    }
    env.session_id = it->second.descriptor.session_id;
    env.seq = it->second.next_seq++;
    transcript.record("->", env);
    auto responses = gw.handle(env, it->second.conn);
    for (const auto& r : responses) transcript.record("<-", r);
    return responses;
  };

  const auto note = [&](const StepVerdict& v) {
    last = v;
    if (v.disposition == Disposition::DENY) any_deny = true;
    if (v.disposition == Disposition::FLAG) any_flag = true;
  };

  for (const auto& step : scenario.steps) {
    if (harness_error) break;
    const auto& p = step.params;

    if (step.op == "seed_fs") {
      gw.vfs().put(normalize_path(p.value("path", ""), corpus.gateway_config.home),
                   fixture_text(corpus, p));
    } else if (step.op == "seed_net") {
      gw.vnet().script(p.value("host", ""), fixture_text(corpus, p));
    } else if (step.op == "handshake") {
      const std::string principal = p.value("principal", current_principal);
      const auto* token = find_secret(principal);
      if (token == nullptr) {
        harness_error = true;
        error_detail = "no pairing token for " + principal;
        break;
      }
      PrincipalState state;
      std::vector<wire::Envelope> exchange;
      auto session = gw.run_handshake(principal, token->secret, gateway::ChannelOrigin::LAN,
                                      state.conn, &exchange);
      for (const auto& env : exchange) transcript.record("~", env);
      if (!session.ok()) {
        harness_error = true;
        error_detail = "handshake failed: " + session.error().code;
        break;
      }
      state.descriptor = session.take();
      principals[principal] = std::move(state);
      current_principal = principal;
    } else if (step.op == "handshake_hijack") {
      const std::string principal = p.value("principal", current_principal);
      const auto* token = find_secret(principal);
      if (token == nullptr) {
        harness_error = true;
        error_detail = "no pairing token for " + principal;
        break;
      }
      // the victim's proof embeds the attacker gateway's fingerprint
      const std::vector<std::uint8_t> attacker_fp(32, 0xEE);
      gateway::Connection conn;
      std::vector<wire::Envelope> exchange;
      auto session = gw.run_handshake(principal, token->secret, gateway::ChannelOrigin::REMOTE,
                                      conn, &exchange, &attacker_fp);
      for (const auto& env : exchange) transcript.record("~", env);
      StepVerdict v;
      if (session.ok()) {
        v.stage = "handshake";
        v.disposition = Disposition::ALLOW;  // the attack went through: a miss
      } else {
        v.stage = "handshake";
        v.disposition = Disposition::DENY;
        v.rules = {"handshake." + to_lower(session.error().code)};
      }
      note(v);
    } else if (step.op == "pin") {
      const auto category = policy::category_from_name(p.value("category", ""));
      if (!category) {
        harness_error = true;
        error_detail = "pin step with bad category";
        break;
      }
      const std::string profile_id = p.value("profile", [&] {
        const auto it = principals.find(current_principal);
        return it == principals.end() ? std::string{} : it->second.descriptor.profile_ref;
      }());
      const auto pinned = gw.pin(profile_id,
                                 {p.value("id", "pin"), *category, p.value("resource", "**"),
                                  Provenance::TRUSTED_OPERATOR, p.value("note", "")},
                                 Provenance::TRUSTED_OPERATOR);
      if (!pinned.ok()) {
        harness_error = true;
        error_detail = "pin failed: " + pinned.error().message;
        break;
      }
    } else if (step.op == "tool_call") {
      wire::Envelope env;
      env.kind = wire::EnvelopeKind::TOOL_CALL;
      env.payload = {{"tool", p.value("tool", "")},
                     {"args", p.value("args", nlohmann::json::object())},
                     {"reasoning", p.value("reasoning", "")}};
      note(verdict_from_envelopes(send(p.value("principal", current_principal), env)));
    } else if (step.op == "filler") {
      const int count = p.value("count", 0);
      const std::uint64_t filler_seed = options.filler_seed.value_or(
          p.value("seed", std::uint64_t{17}));
      std::mt19937_64 rng(filler_seed);
      for (int i = 0; i < count && !harness_error; ++i) {
        wire::Envelope env;
        env.kind = wire::EnvelopeKind::TOOL_CALL;
        if (rng() % 3 == 0) {
          env.payload = {{"tool", "fs.write"},
                         {"args",
                          {{"path", "workspace/note" + std::to_string(rng() % 10) + ".md"},
                           {"content", "interleaved note " + std::to_string(i)}}},
                         {"reasoning", "write the running notes file"}};
        } else {
          env.payload = {{"tool", "fs.read"},
                         {"args", {{"path", "calendar/f" + std::to_string(rng() % 10) + ".ics"}}},
                         {"reasoning", "read the calendar file"}};
        }
        const auto v = verdict_from_envelopes(send(p.value("principal", current_principal), env));
        if (v.is_error) {
          harness_error = true;
          error_detail = "filler call failed: " + v.error_code;
        }
      }
    } else if (step.op == "agent_msg") {
      wire::Envelope env;
      env.kind = wire::EnvelopeKind::AGENT_MSG;
      env.payload = {{"to", p.value("to", "")}, {"body", p.value("body", "")}};
      note(verdict_from_envelopes(send(p.value("from", current_principal), env)));
    } else if (step.op == "memory_write") {
      wire::Envelope env;
      env.kind = wire::EnvelopeKind::MEMORY_WRITE;
      env.payload = nlohmann::json::object();
      for (const char* key : {"content", "content_from_artifact", "provenance", "sensitivity"}) {
        if (p.contains(key)) env.payload[key] = p[key];
      }
      note(verdict_from_envelopes(send(p.value("principal", current_principal), env)));
    } else if (step.op == "install_skill") {
      const auto package_dir = fs::path(corpus.root) / p.value("package", "");
      auto loaded = audit::load_package(package_dir.string());
      StepVerdict v;
      v.stage = "audit";
      if (!loaded.ok()) {
        v.disposition = Disposition::DENY;
        v.rules = {"aud." + to_lower(loaded.error().code)};
      } else {
        const auto verdict =
            audit::admit(loaded.value(), policy::default_sensitive_paths(), default_lexicon(),
                         gw.admission_ledger(), fixed_clock(std::chrono::system_clock::time_point{}));
        switch (verdict.disposition) {
          case audit::AuditDisposition::ADMIT: v.disposition = Disposition::ALLOW; break;
          case audit::AuditDisposition::ADMIT_WITH_FLAGS: v.disposition = Disposition::FLAG; break;
          case audit::AuditDisposition::REJECT: v.disposition = Disposition::DENY; break;
        }
        for (const auto& f : verdict.findings) v.rules.push_back(f.rule_id);
      }
      note(v);
    } else {
      harness_error = true;
      error_detail = "unknown step op: " + step.op;
    }

    if (last && last->is_error && step.op != "handshake_hijack") {
      harness_error = true;
      error_detail = "protocol error: " + last->error_code;
    }
  }

  transcript.flush(transcript_path);
  report.transcript_path = transcript_path;
  report.mediate_calls = gw.telemetry().mediate_call_count();
  report.telemetry_events = gw.telemetry().event_count();

  if (harness_error) {
    report.outcome = Outcome::ERROR;
    report.detail = error_detail;
    return report;
  }
  if (!last) {
    report.outcome = Outcome::ERROR;
    report.detail = "scenario produced no verdict";
    return report;
  }

  report.deciding_stage = last->stage;
  report.final_disposition = last->disposition;
  report.finding_rules = last->rules;

  if (scenario.taxonomy_ref == "benign") {
    if (any_deny) {
      report.outcome = Outcome::FALSE_BLOCK;
    } else if (any_flag) {
      report.outcome = Outcome::MISSED;
      report.detail = "benign workflow was flagged";
    } else {
      report.outcome = Outcome::DETECTED;
    }
    return report;
  }

  const auto& expect = scenario.expectation;
  const bool stage_ok = expect.stage.empty() || last->stage == expect.stage;
  const bool disposition_ok = last->disposition == expect.disposition;
  const bool rule_ok =
      expect.rule_prefix.empty() ||
      std::any_of(last->rules.begin(), last->rules.end(), [&](const std::string& r) {
        return r.rfind(expect.rule_prefix, 0) == 0;
      });
  report.outcome = stage_ok && disposition_ok && rule_ok ? Outcome::DETECTED : Outcome::MISSED;
  if (report.outcome == Outcome::MISSED) {
    report.detail = "expected " + std::string(disposition_name(expect.disposition)) + " at " +
                    (expect.stage.empty() ? "any stage" : expect.stage) + " with rule " +
                    expect.rule_prefix;
  }
  return report;
}

std::vector<ReplayReport> replay_all(const Corpus& corpus, const RunOptions& options) {
  std::vector<ReplayReport> reports;
  for (const auto& scenario : corpus.scenarios) {
    if (!options.scenario_filter.empty() && scenario.scenario_id != options.scenario_filter) {
      continue;
    }
    reports.push_back(replay(scenario, corpus, options));
  }
  if (!options.run_dir.empty()) {
    std::ofstream out(fs::path(options.run_dir) / "reports.jsonl", std::ios::trunc);
    for (const auto& r : reports) out << report_to_json(r).dump() << "\n";
  }
  return reports;
}

Result<CoverageScore> score(const std::vector<ReplayReport>& reports) {
  if (reports.empty()) {
    return Result<CoverageScore>::failure("NO_REPORTS", "nothing to score");
  }
  CoverageScore out;
  for (const auto& r : reports) {
    if (r.taxonomy_ref == "benign") {
      ++out.benign_total;
      if (r.outcome == Outcome::FALSE_BLOCK) ++out.false_blocks;
      continue;
    }
    auto& row = out.per_row[r.taxonomy_ref];
    ++row.total;
    ++out.attack_total;
    if (r.outcome == Outcome::DETECTED) {
      ++row.detected;
      ++out.attack_detected;
    }
  }
  out.overall_rate =
      out.attack_total == 0 ? 0.0 : double(out.attack_detected) / double(out.attack_total);
  out.false_block_rate =
      out.benign_total == 0 ? 0.0 : double(out.false_blocks) / double(out.benign_total);
  return out;
}

nlohmann::json score_to_json(const CoverageScore& score) {
  nlohmann::json rows = nlohmann::json::object();
  for (const auto& [row, rs] : score.per_row) {
    rows[row] = {{"detected", rs.detected}, {"total", rs.total}};
  }
  return {{"per_row", std::move(rows)},
          {"attack_total", score.attack_total},
          {"attack_detected", score.attack_detected},
          {"benign_total", score.benign_total},
          {"false_blocks", score.false_blocks},
          {"overall_rate", score.overall_rate},
          {"false_block_rate", score.false_block_rate}};
}

Result<FoldBackResult> fold_back(const std::vector<ReplayReport>& reports,
                                 const Lexicon& lexicon,
                                 const policy::SensitivePathList& sensitive_paths,
                                 const std::optional<std::string>& advisory_feed_path,
                                 sandbox::GovernanceLog& governance) {
  FoldBackResult out;
  out.merged_lexicon = lexicon;
  out.merged_sensitive_paths = sensitive_paths;

  for (const auto& r : reports) {
    if (r.outcome != Outcome::MISSED || r.taxonomy_ref == "benign") continue;
    nlohmann::json proposal = {
        {"kind", "rule_stub"},
        {"scenario", r.scenario_id},
        {"taxonomy_ref", r.taxonomy_ref},
        {"suggested",
         r.taxonomy_ref == "stac" ? "chain_rule" : "lexicon_pattern"},
        {"transcript", r.transcript_path},
        {"detail", r.detail}};
    governance.append("proposal", proposal);
    out.proposals.push_back(std::move(proposal));
  }

  if (advisory_feed_path) {
    std::ifstream in(*advisory_feed_path);
    if (!in) {
      return Result<FoldBackResult>::failure("FEED_MALFORMED",
                                             "cannot open " + *advisory_feed_path);
    }
    const auto feed = nlohmann::json::parse(in, nullptr, false);
    if (feed.is_discarded() || !feed.is_object() || !feed.contains("records") ||
        !feed["records"].is_array()) {
      return Result<FoldBackResult>::failure("FEED_MALFORMED",
                                             "advisory feed must carry a records array");
    }
    for (const auto& record : feed["records"]) {
      const std::string kind = record.value("kind", "");
      if (kind == "lexicon_rule") {
        auto parsed = lexicon_from_json(
            {{"version", out.merged_lexicon.version}, {"rules", {record.value("rule", nlohmann::json::object())}}});
        if (!parsed.ok() || parsed.value().rules.size() != 1) {
          return Result<FoldBackResult>::failure("FEED_MALFORMED", "bad lexicon_rule record");
        }
        auto rule = parsed.value().rules[0];
        std::erase_if(out.merged_lexicon.rules,
                      [&](const LexiconRule& r) { return r.id == rule.id; });
        out.merged_lexicon.rules.push_back(std::move(rule));
        out.lexicon_changed = true;
      } else if (kind == "sensitive_path") {
        const auto cls = policy::resource_class_from_name(record.value("class", ""));
        if (!record.contains("pattern") || !cls) {
          return Result<FoldBackResult>::failure("FEED_MALFORMED", "bad sensitive_path record");
        }
        out.merged_sensitive_paths.entries.push_back(
            {record["pattern"].get<std::string>(), *cls});
        out.sensitive_paths_changed = true;
      } else {
        return Result<FoldBackResult>::failure("FEED_MALFORMED", "unknown record kind: " + kind);
      }
    }
    if (out.lexicon_changed) ++out.merged_lexicon.version;
    if (out.sensitive_paths_changed) ++out.merged_sensitive_paths.version;
  }
  return out;
}

std::string snapshot_tree(const std::string& dir) {
  std::vector<std::string> paths;
  if (fs::is_directory(dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (entry.is_regular_file()) {
        paths.push_back(fs::relative(entry.path(), dir).generic_string());
      }
    }
  }
  std::sort(paths.begin(), paths.end());
  std::string blob;
  for (const auto& rel : paths) {
    std::ifstream in(fs::path(dir) / rel, std::ios::binary);
    blob += rel;
    blob += '\0';
    blob.append(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    blob += '\0';
  }
  return digest_hex(sha256(blob));
}

}  // namespace clawguard::harness
