#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clawguard/common.hpp"
#include "clawguard/gateway.hpp"
#include "clawguard/lexicon.hpp"
#include "clawguard/policy.hpp"

namespace clawguard::harness {

// The eight taxonomy rows the corpus must cover, plus "benign".
extern const std::vector<std::string> kTaxonomyRows;

struct ScenarioStep {
  std::string op;  // seed_fs/seed_net/handshake/handshake_hijack/pin/tool_call/
                   // filler/agent_msg/memory_write/install_skill
  nlohmann::json params;
};

struct Expectation {
  std::string stage;        // empty for benign scenarios
  Disposition disposition = Disposition::ALLOW;
  std::string rule_prefix;  // empty matches anything
};

struct Scenario {
  std::string scenario_id;
  std::string taxonomy_ref;
  std::string description;
  std::string principal;  // default principal for steps
  std::vector<ScenarioStep> steps;
  Expectation expectation;
};

enum class Outcome { DETECTED, MISSED, FALSE_BLOCK, ERROR };

std::string_view outcome_name(Outcome o);

struct ReplayReport {
  std::string scenario_id;
  std::string taxonomy_ref;
  Outcome outcome = Outcome::ERROR;
  std::string deciding_stage;
  Disposition final_disposition = Disposition::ALLOW;
  std::vector<std::string> finding_rules;
  std::string transcript_path;
  std::string detail;
  std::size_t mediate_calls = 0;     // complete-mediation accounting
  std::size_t telemetry_events = 0;
};

nlohmann::json report_to_json(const ReplayReport& r);
Result<ReplayReport> report_from_json(const nlohmann::json& j);

struct Corpus {
  std::string root;
  gateway::GatewayConfig gateway_config;
  std::vector<policy::CapabilityProfile> profiles;
  std::vector<Scenario> scenarios;
};

// Parses every scenario file and checks taxonomy coverage: one scenario per
// row at minimum, plus at least three benign workflows.
Result<Corpus> load_corpus(const std::string& corpus_dir);
Result<Scenario> scenario_from_json(const nlohmann::json& j);

struct RunOptions {
  std::string run_dir;             // empty: keep transcripts in memory only
  std::string scenario_filter;     // empty: all
  std::optional<std::uint64_t> filler_seed;  // overrides the scenarios' filler seed
};

// Fresh gateway per scenario; steps run against the real pipeline.
ReplayReport replay(const Scenario& scenario, const Corpus& corpus, const RunOptions& options);
std::vector<ReplayReport> replay_all(const Corpus& corpus, const RunOptions& options);

struct RowScore {
  int detected = 0;
  int total = 0;
};

struct CoverageScore {
  std::map<std::string, RowScore> per_row;  // attack rows only
  int attack_total = 0;
  int attack_detected = 0;
  int benign_total = 0;
  int false_blocks = 0;
  double overall_rate = 0.0;
  double false_block_rate = 0.0;
};

Result<CoverageScore> score(const std::vector<ReplayReport>& reports);
nlohmann::json score_to_json(const CoverageScore& score);

struct FoldBackResult {
  std::vector<nlohmann::json> proposals;  // one per missed scenario
  Lexicon merged_lexicon;
  policy::SensitivePathList merged_sensitive_paths;
  bool lexicon_changed = false;
  bool sensitive_paths_changed = false;
};

// Missed scenarios become rule-stub proposals in the governance log; an
// optional advisory feed merges into the lexicons with a version bump.
// Nothing applies silently: callers persist the merged artifacts explicitly.
Result<FoldBackResult> fold_back(const std::vector<ReplayReport>& reports,
                                 const Lexicon& lexicon,
                                 const policy::SensitivePathList& sensitive_paths,
                                 const std::optional<std::string>& advisory_feed_path,
                                 sandbox::GovernanceLog& governance);

// Digest over a directory tree (sorted relative paths + contents); the
// hermeticity check compares snapshots before and after a replay.
std::string snapshot_tree(const std::string& dir);

}  // namespace clawguard::harness
