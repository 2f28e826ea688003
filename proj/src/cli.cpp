#include "clawguard/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "clawguard/gateway.hpp"
#include "clawguard/harness.hpp"
#include "clawguard/memory_guard.hpp"
#include "clawguard/paths.hpp"
#include "clawguard/serve.hpp"
#include "clawguard/skill_auditor.hpp"

namespace clawguard::cli {
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitFlagged = 2;
constexpr int kExitDenied = 3;

int exit_for(Disposition d) {
  switch (d) {
    case Disposition::ALLOW: return kExitOk;
    case Disposition::FLAG: return kExitFlagged;
    case Disposition::DENY: return kExitDenied;
  }
  return kExitError;
}

std::string resolve_config_path(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("CLAWGUARD_CONFIG"); env != nullptr && *env != '\0') {
    return env;
  }
  return "clawguard.json";
}

Result<policy::CapabilityProfile> find_profile(const std::string& profile_arg,
                                               const std::string& profile_dir) {
  // a path to a profile document wins; otherwise resolve by id in the dir
  if (fs::exists(profile_arg) && fs::is_regular_file(profile_arg)) {
    return policy::load_profile_file(profile_arg);
  }
  const auto by_id = fs::path(profile_dir) / (profile_arg + ".json");
  if (fs::exists(by_id)) return policy::load_profile_file(by_id.string());
  return Result<policy::CapabilityProfile>::failure("UNKNOWN_PROFILE",
                                                    "no profile " + profile_arg + " under " +
                                                        profile_dir);
}

int cmd_audit_skill(const std::string& path, const std::string& ledger_path,
                    const std::string& format, std::ostream& out, std::ostream& err) {
  audit::AdmissionLedger ledger;
  if (!ledger_path.empty()) {
    auto opened = audit::AdmissionLedger::open(ledger_path);
    if (!opened.ok()) {
      err << "ledger: " << opened.error().message << "\n";
      return kExitError;
    }
    ledger = opened.take();
  }
  auto package = audit::load_package(path);
  if (!package.ok()) {
    if (package.error().code == "DIGEST_MISMATCH") {
      out << "REJECT " << path << ": " << package.error().message << "\n";
      return kExitDenied;
    }
    err << "audit-skill: " << package.error().message << "\n";
    return kExitError;
  }
  const auto verdict = audit::admit(package.value(), policy::default_sensitive_paths(),
                                    default_lexicon(), ledger, system_clock());

  if (format == "json-lines") {
    nlohmann::json findings = nlohmann::json::array();
    for (const auto& f : verdict.findings) findings.push_back(finding_to_json(f));
    nlohmann::json undeclared = nlohmann::json::array();
    for (const auto& u : verdict.undeclared_capabilities) {
      undeclared.push_back({{"category", std::string(policy::category_name(u.category))},
                            {"resource", u.resource}});
    }
    out << nlohmann::json{{"skill", package.value().manifest.name},
                          {"version", package.value().manifest.version},
                          {"digest", package.value().computed_digest},
                          {"disposition",
                           std::string(audit::audit_disposition_name(verdict.disposition))},
                          {"findings", std::move(findings)},
                          {"undeclared_capabilities", std::move(undeclared)}}
               .dump()
        << "\n";
  } else {
    out << audit::audit_disposition_name(verdict.disposition) << " "
        << package.value().manifest.name << "@" << package.value().manifest.version << "\n";
    for (const auto& f : verdict.findings) {
      out << "  [" << severity_name(f.severity) << "] " << f.rule_id << " at " << f.locator
          << ": " << f.message << "\n";
    }
    for (const auto& u : verdict.undeclared_capabilities) {
      out << "  undeclared: " << policy::category_name(u.category) << ":" << u.resource << "\n";
    }
  }
  switch (verdict.disposition) {
    case audit::AuditDisposition::ADMIT: return kExitOk;
    case audit::AuditDisposition::ADMIT_WITH_FLAGS: return kExitFlagged;
    case audit::AuditDisposition::REJECT: return kExitDenied;
  }
  return kExitError;
}

int cmd_policy_check(const std::string& profile_arg, const std::string& profile_dir,
                     const std::string& category_name_arg, const std::string& resource,
                     std::ostream& out, std::ostream& err) {
  auto profile = find_profile(profile_arg, profile_dir);
  if (!profile.ok()) {
    err << "policy: " << profile.error().message << "\n";
    return kExitError;
  }
  const auto category = policy::category_from_name(category_name_arg);
  if (!category) {
    err << "policy: unknown category " << category_name_arg << "\n";
    return kExitError;
  }
  policy::ActionDescriptor action;
  action.category = *category;
  action.resource = normalize_path(resource, profile.value().home);
  action.resource_class =
      policy::default_sensitive_paths().classify(action.resource, profile.value().home);
  const auto decision = policy::evaluate(action, profile.value());
  out << disposition_name(decision.disposition);
  for (const auto& rule : decision.matched_rules) out << " " << rule;
  out << "\n";
  for (const auto& f : decision.findings) {
    out << "  [" << severity_name(f.severity) << "] " << f.rule_id << ": " << f.message << "\n";
  }
  return exit_for(decision.disposition);
}

int cmd_policy_pin(const std::string& profile_arg, const std::string& profile_dir,
                   const std::string& category_name_arg, const std::string& resource,
                   const std::string& pin_id, std::ostream& out, std::ostream& err) {
  auto profile = find_profile(profile_arg, profile_dir);
  if (!profile.ok()) {
    err << "policy: " << profile.error().message << "\n";
    return kExitError;
  }
  const auto category = policy::category_from_name(category_name_arg);
  if (!category) {
    err << "policy: unknown category " << category_name_arg << "\n";
    return kExitError;
  }
  // the CLI is the operator channel
  auto next = policy::pin_constraint(
      profile.value(), {pin_id, *category, resource, Provenance::TRUSTED_OPERATOR, ""},
      Provenance::TRUSTED_OPERATOR);
  if (!next.ok()) {
    err << "policy: " << next.error().message << "\n";
    return kExitError;
  }
  const auto target = fs::exists(profile_arg)
                          ? fs::path(profile_arg)
                          : fs::path(profile_dir) / (profile_arg + ".json");
  std::ofstream file(target, std::ios::trunc);
  if (!file) {
    err << "policy: cannot write " << target.string() << "\n";
    return kExitError;
  }
  file << policy::profile_to_json(next.value()).dump(2) << "\n";
  out << "pinned " << pin_id << "; " << next.value().profile_id << " now version "
      << next.value().version << "\n";
  return kExitOk;
}

int cmd_memory(const std::string& action, const std::string& store_dir,
               const std::string& entry_id, std::ostream& out, std::ostream& err) {
  auto store = memory::MemoryStore::open(store_dir);
  if (!store.ok()) {
    err << "memory: " << store.error().message << "\n";
    return kExitError;
  }
  if (action == "list") {
    for (const auto& id : store.value().entry_ids()) {
      const auto entry = store.value().vet_read(id);
      if (entry.ok()) {
        out << id << " " << taint_to_string(entry.value().taint)
            << (entry.value().findings.empty() ? "" : " [flagged]") << "\n";
      }
    }
    return kExitOk;
  }
  const auto entry = store.value().vet_read(entry_id);
  if (!entry.ok()) {
    err << "memory: " << entry.error().message << "\n";
    return kExitError;
  }
  out << entry.value().content << "\n";
  out << "taint: " << taint_to_string(entry.value().taint) << "\n";
  for (const auto& f : entry.value().findings) {
    out << "  [" << severity_name(f.severity) << "] " << f.rule_id << ": " << f.message << "\n";
  }
  return entry.value().findings.empty() ? kExitOk : kExitFlagged;
}

int cmd_baseline_show(const std::string& profile_id, const std::string& baselines_path,
                      std::ostream& out, std::ostream& err) {
  sandbox::BehaviorBaselines baselines;
  if (!baselines_path.empty()) {
    std::ifstream in(baselines_path);
    if (!in) {
      err << "baseline: cannot open " << baselines_path << "\n";
      return kExitError;
    }
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
      err << "baseline: invalid json\n";
      return kExitError;
    }
    auto loaded = sandbox::BehaviorBaselines::from_json(j);
    if (!loaded.ok()) {
      err << "baseline: " << loaded.error().message << "\n";
      return kExitError;
    }
    baselines = loaded.take();
  }
  const auto all = baselines.to_json();
  bool any = false;
  for (const auto& [key, window] : all["windows"].items()) {
    if (key.rfind(profile_id + "|", 0) != 0) continue;
    any = true;
    double sum = 0;
    for (const auto& v : window) sum += v.get<int>();
    const double mean = window.empty() ? 0.0 : sum / window.size();
    out << key << " samples=" << window.size() << " mean=" << mean << "\n";
  }
  if (!any) out << "(no windows for profile " << profile_id << ")\n";
  return kExitOk;
}

int cmd_replay(const std::string& corpus_dir, const std::string& scenario_id,
               const std::string& run_dir, const std::string& format,
               const std::string& advisory_feed, bool apply_folds, std::ostream& out,
               std::ostream& err) {
  auto corpus = harness::load_corpus(corpus_dir);
  if (!corpus.ok()) {
    err << "replay: " << corpus.error().code << ": " << corpus.error().message << "\n";
    return kExitError;
  }
  harness::RunOptions options;
  options.scenario_filter = scenario_id;
  options.run_dir = run_dir;
  if (options.run_dir.empty()) {
    options.run_dir = (fs::temp_directory_path() / "clawguard-replay").string();
    fs::create_directories(options.run_dir);
  }
  const auto reports = harness::replay_all(corpus.value(), options);

  if (format == "json-lines") {
    for (const auto& r : reports) out << harness::report_to_json(r).dump() << "\n";
  } else {
    for (const auto& r : reports) {
      out << r.scenario_id << " [" << r.taxonomy_ref << "] " << harness::outcome_name(r.outcome)
          << " (" << disposition_name(r.final_disposition)
          << (r.deciding_stage.empty() ? "" : " at " + r.deciding_stage) << ")\n";
      if (!r.detail.empty()) out << "    " << r.detail << "\n";
    }
  }

  const auto coverage = harness::score(reports);
  if (!coverage.ok()) {
    err << "replay: " << coverage.error().message << "\n";
    return kExitError;
  }
  if (format == "json-lines") {
    out << harness::score_to_json(coverage.value()).dump() << "\n";
  } else {
    out << "rows:\n";
    for (const auto& [row, rs] : coverage.value().per_row) {
      out << "  " << row << ": " << rs.detected << "/" << rs.total << "\n";
    }
    out << "overall: " << coverage.value().attack_detected << "/"
        << coverage.value().attack_total
        << "  false-blocks: " << coverage.value().false_blocks << "/"
        << coverage.value().benign_total << "\n";
    out << "run dir: " << options.run_dir << "\n";
  }

  sandbox::GovernanceLog governance;
  governance.set_sink((fs::path(options.run_dir) / "governance.jsonl").string());
  std::optional<std::string> feed;
  if (!advisory_feed.empty()) feed = advisory_feed;
  const auto folds = harness::fold_back(reports, default_lexicon(),
                                        policy::default_sensitive_paths(), feed, governance);
  if (!folds.ok()) {
    err << "replay: " << folds.error().code << ": " << folds.error().message << "\n";
    return kExitError;
  }
  if (!folds.value().proposals.empty()) {
    out << folds.value().proposals.size()
        << " proposal(s) appended to the governance log (apply explicitly)\n";
  }
  if (apply_folds && (folds.value().lexicon_changed || folds.value().sensitive_paths_changed)) {
    const auto lex_path = fs::path(options.run_dir) / "lexicon.json";
    const auto paths_path = fs::path(options.run_dir) / "sensitive_paths.json";
    save_lexicon_file(folds.value().merged_lexicon, lex_path.string());
    std::ofstream sp(paths_path);
    sp << policy::sensitive_paths_to_json(folds.value().merged_sensitive_paths).dump(2) << "\n";
    out << "applied fold-back: " << lex_path.string() << ", " << paths_path.string() << "\n";
  }

  const bool all_met = coverage.value().attack_detected == coverage.value().attack_total &&
                       coverage.value().false_blocks == 0 &&
                       std::none_of(reports.begin(), reports.end(),
                                    [](const harness::ReplayReport& r) {
                                      return r.outcome == harness::Outcome::ERROR ||
                                             r.outcome == harness::Outcome::MISSED;
                                    });
  return all_met ? kExitOk : kExitFlagged;
}

int cmd_report(const std::string& run_dir, const std::string& format, std::ostream& out,
               std::ostream& err) {
  const auto path = fs::path(run_dir) / "reports.jsonl";
  std::ifstream in(path);
  if (!in) {
    err << "report: cannot open " << path.string() << "\n";
    return kExitError;
  }
  std::vector<harness::ReplayReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    auto r = harness::report_from_json(j);
    if (r.ok()) reports.push_back(r.take());
  }
  if (format == "json-lines") {
    for (const auto& r : reports) out << harness::report_to_json(r).dump() << "\n";
  } else {
    for (const auto& r : reports) {
      out << r.scenario_id << " [" << r.taxonomy_ref << "] "
          << harness::outcome_name(r.outcome) << "\n";
    }
    const auto coverage = harness::score(reports);
    if (coverage.ok()) {
      out << "overall: " << coverage.value().attack_detected << "/"
          << coverage.value().attack_total << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"clawguard: a tool-call security gateway with a red-team replay harness"};
  app.require_subcommand(1);

  std::string config_flag;
  app.add_option("--config", config_flag, "gateway config path (env CLAWGUARD_CONFIG)");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "run the gateway on the configured endpoint");
  std::string serve_profiles;
  serve_cmd->add_option("--profiles", serve_profiles, "directory of capability profiles");

  // audit-skill
  auto* audit_cmd = app.add_subcommand("audit-skill", "statically vet a skill package");
  std::string audit_path;
  std::string audit_ledger;
  std::string audit_format = "text";
  audit_cmd->add_option("path", audit_path, "package directory")->required();
  audit_cmd->add_option("--ledger", audit_ledger, "admission ledger file");
  audit_cmd->add_option("--format", audit_format, "text or json-lines");

  // policy
  auto* policy_cmd = app.add_subcommand("policy", "offline policy evaluation");
  auto* check_cmd = policy_cmd->add_subcommand("check", "evaluate one action");
  std::string pol_profile, pol_category, pol_resource, profile_dir = "data/profiles";
  check_cmd->add_option("profile", pol_profile)->required();
  check_cmd->add_option("category", pol_category)->required();
  check_cmd->add_option("resource", pol_resource)->required();
  check_cmd->add_option("--profile-dir", profile_dir, "profile documents directory");
  auto* pin_cmd = policy_cmd->add_subcommand("pin", "append a pinned deny constraint");
  std::string pin_profile, pin_category, pin_resource, pin_id = "pin";
  pin_cmd->add_option("profile", pin_profile)->required();
  pin_cmd->add_option("category", pin_category)->required();
  pin_cmd->add_option("resource", pin_resource)->required();
  pin_cmd->add_option("--id", pin_id, "constraint id");
  pin_cmd->add_option("--profile-dir", profile_dir);
  auto* show_cmd = policy_cmd->add_subcommand("show", "print a profile");
  std::string show_profile;
  show_cmd->add_option("profile", show_profile)->required();
  show_cmd->add_option("--profile-dir", profile_dir);

  // memory
  auto* memory_cmd = app.add_subcommand("memory", "inspect the memory store");
  auto* mem_list = memory_cmd->add_subcommand("list", "list entries");
  auto* mem_show = memory_cmd->add_subcommand("show", "show one entry");
  std::string store_dir = "memory-store", mem_entry;
  mem_list->add_option("--store", store_dir, "store directory");
  mem_show->add_option("--store", store_dir, "store directory");
  mem_show->add_option("entry", mem_entry)->required();

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "behavioral baseline statistics");
  auto* baseline_show = baseline_cmd->add_subcommand("show", "dump statistics for a profile");
  std::string baseline_profile, baselines_path;
  baseline_show->add_option("profile", baseline_profile)->required();
  baseline_show->add_option("--baselines", baselines_path, "baselines json file");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "replay the scenario corpus");
  std::string corpus_dir = "corpus";
  std::string scenario_id, run_dir, replay_format = "text", advisory_feed;
  bool apply_folds = false;
  replay_cmd->add_option("--corpus", corpus_dir, "corpus directory");
  replay_cmd->add_option("--scenario", scenario_id, "replay a single scenario id");
  replay_cmd->add_option("--out", run_dir, "run directory for transcripts and reports");
  replay_cmd->add_option("--format", replay_format, "text or json-lines");
  replay_cmd->add_option("--advisory-feed", advisory_feed, "vulnerability advisory feed file");
  replay_cmd->add_flag("--apply-folds", apply_folds, "write merged lexicons after fold-back");

  // report
  auto* report_cmd = app.add_subcommand("report", "re-render replay reports");
  std::string report_dir = (fs::temp_directory_path() / "clawguard-replay").string();
  std::string report_format = "text";
  report_cmd->add_option("--run-dir", report_dir, "replay run directory");
  report_cmd->add_option("--format", report_format, "text or json-lines");

  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n";
    err << app.help();
    return kExitError;
  }

  if (serve_cmd->parsed()) {
    auto config = gateway::load_config_file(resolve_config_path(config_flag));
    if (!config.ok()) {
      err << "serve: " << config.error().message << "\n";
      return kExitError;
    }
    return serve::serve_forever(config.take(), serve_profiles, out, err);
  }
  if (audit_cmd->parsed()) {
    return cmd_audit_skill(audit_path, audit_ledger, audit_format, out, err);
  }
  if (policy_cmd->parsed()) {
    if (check_cmd->parsed()) {
      return cmd_policy_check(pol_profile, profile_dir, pol_category, pol_resource, out, err);
    }
    if (pin_cmd->parsed()) {
      return cmd_policy_pin(pin_profile, profile_dir, pin_category, pin_resource, pin_id, out,
                            err);
    }
    if (show_cmd->parsed()) {
      auto profile = find_profile(show_profile, profile_dir);
      if (!profile.ok()) {
        err << "policy: " << profile.error().message << "\n";
        return kExitError;
      }
      out << policy::profile_to_json(profile.value()).dump(2) << "\n";
      return kExitOk;
    }
    err << "policy: expected check/pin/show\n";
    return kExitError;
  }
  if (memory_cmd->parsed()) {
    if (mem_list->parsed()) return cmd_memory("list", store_dir, "", out, err);
    if (mem_show->parsed()) return cmd_memory("show", store_dir, mem_entry, out, err);
    err << "memory: expected list/show\n";
    return kExitError;
  }
  if (baseline_cmd->parsed()) {
    if (baseline_show->parsed()) {
      return cmd_baseline_show(baseline_profile, baselines_path, out, err);
    }
    err << "baseline: expected show\n";
    return kExitError;
  }
  if (replay_cmd->parsed()) {
    return cmd_replay(corpus_dir, scenario_id, run_dir, replay_format, advisory_feed,
                      apply_folds, out, err);
  }
  if (report_cmd->parsed()) {
    return cmd_report(report_dir, report_format, out, err);
  }
  err << app.help();
  return kExitError;
}

}  // namespace clawguard::cli
