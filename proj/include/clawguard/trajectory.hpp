#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clawguard/common.hpp"
#include "clawguard/policy.hpp"
#include "clawguard/taint.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard::trajectory {

struct AtomicAction {
  std::uint64_t seq = 0;
  policy::ActionDescriptor descriptor;
  std::string produced_artifact;                // empty when the action produces nothing
  std::vector<std::string> consumed_artifacts;  // ids; must exist already
};

struct ArtifactInfo {
  TaintLabel own;      // taint at production, before ancestor joins
  TaintLabel current;  // after propagation
  std::string locator;
  std::uint64_t producer_seq = 0;
};

struct ChainFinding {
  std::string rule_id;
  std::vector<std::uint64_t> node_path;  // ordered seqs along existing edges
  std::string source_class;
  std::string sink_class;
  Severity severity = Severity::HIGH;
  std::string message;
};

struct ChainRules {
  int version = 1;
  bool secret_egress = true;       // S1
  bool tainted_execute = true;     // S2
  bool memory_pollution = true;    // S3
  Provenance execute_min_provenance = Provenance::SKILL_THIRD_PARTY;
  std::string memory_dir_pattern = "memory/**";
};

ChainRules default_chain_rules();
Result<ChainRules> chain_rules_from_json(const nlohmann::json& j);
nlohmann::json chain_rules_to_json(const ChainRules& rules);

// Per-session DAG of atomic actions; edges run from producers to consumers
// (always low seq to high seq, so the graph is acyclic by construction).
class TrajectoryGraph {
public:
  Status append_action(AtomicAction action);
  void propagate_taint();

  // External artifacts (fetched documents, delivered messages, memory
  // recalls) participate in dataflow without a producing tool call.
  void register_external_artifact(const std::string& id, TaintLabel taint,
                                  const std::string& locator);

  // Joins additional taint into an artifact whose content proved more
  // hostile than its producing action's arguments (e.g. a fetch whose
  // response is external content).
  void raise_artifact_taint(const std::string& id, TaintLabel taint);

  const std::vector<AtomicAction>& nodes() const { return nodes_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const std::map<std::string, ArtifactInfo>& artifacts() const { return artifacts_; }
  std::optional<TaintLabel> artifact_taint(const std::string& id) const;
  std::optional<std::string> artifact_by_locator(const std::string& locator) const;

private:
  std::vector<AtomicAction> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;  // node index -> node index
  std::map<std::string, ArtifactInfo> artifacts_;
  std::map<std::string, std::size_t> producer_node_;  // artifact id -> node index
};

// Taint an artifact gains from the resource class of the action that made it.
TaintLabel class_derived_taint(policy::ResourceClass cls);

std::vector<ChainFinding> detect_stac(const TrajectoryGraph& graph,
                                      const policy::CapabilityProfile& profile,
                                      const ChainRules& rules = default_chain_rules());

struct IntentProfile {
  std::set<policy::ActionCategory> declared_categories;
  int extraction_version = 0;
};

struct VerbLexicon {
  int version = 1;
  std::map<std::string, std::vector<policy::ActionCategory>> verbs;
};

VerbLexicon default_verb_lexicon();
Result<VerbLexicon> verb_lexicon_from_json(const nlohmann::json& j);
nlohmann::json verb_lexicon_to_json(const VerbLexicon& lex);

class IntentClassifier {
public:
  virtual ~IntentClassifier() = default;
  virtual IntentProfile extract(const std::string& reasoning_excerpt) const = 0;
};

// Deterministic verb-lexicon mapping; the default classifier.
class LexiconIntentClassifier : public IntentClassifier {
public:
  explicit LexiconIntentClassifier(VerbLexicon lexicon) : lexicon_(std::move(lexicon)) {}
  IntentProfile extract(const std::string& reasoning_excerpt) const override;

private:
  VerbLexicon lexicon_;
};

IntentProfile extract_intent(const std::string& reasoning_excerpt,
                             const VerbLexicon& lexicon = default_verb_lexicon());

enum class CorrelationStatus { CONSISTENT, MISMATCH };

struct CorrelationVerdict {
  CorrelationStatus status = CorrelationStatus::CONSISTENT;
  Disposition disposition = Disposition::ALLOW;
  std::optional<Finding> finding;
};

// ANALYZE implies READ_LOCAL; an empty intent profile is flagged, never
// silently consistent.
CorrelationVerdict correlate(const IntentProfile& intent,
                             const policy::ActionDescriptor& action);

}  // namespace clawguard::trajectory
