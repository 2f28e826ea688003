#include "clawguard/trajectory.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

#include "clawguard/paths.hpp"

namespace clawguard::trajectory {

ChainRules default_chain_rules() {
  return ChainRules{};
}

Result<ChainRules> chain_rules_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) {
    return Result<ChainRules>::failure("MALFORMED", "chain rules require version");
  }
  ChainRules rules;
  rules.version = j["version"].get<int>();
  rules.secret_egress = j.value("secret_egress", true);
  rules.tainted_execute = j.value("tainted_execute", true);
  rules.memory_pollution = j.value("memory_pollution", true);
  if (j.contains("execute_min_provenance")) {
    const auto p = provenance_from_name(j["execute_min_provenance"].get<std::string>());
    if (!p) return Result<ChainRules>::failure("MALFORMED", "unknown provenance");
    rules.execute_min_provenance = *p;
  }
  rules.memory_dir_pattern = j.value("memory_dir_pattern", "memory/**");
  return rules;
}

nlohmann::json chain_rules_to_json(const ChainRules& rules) {
  return {{"version", rules.version},
          {"secret_egress", rules.secret_egress},
          {"tainted_execute", rules.tainted_execute},
          {"memory_pollution", rules.memory_pollution},
          {"execute_min_provenance", std::string(provenance_name(rules.execute_min_provenance))},
          {"memory_dir_pattern", rules.memory_dir_pattern}};
}

TaintLabel class_derived_taint(policy::ResourceClass cls) {
  switch (cls) {
    case policy::ResourceClass::SENSITIVE_SECRET:
      return {Provenance::TRUSTED_OPERATOR, Sensitivity::SECRET};
    case policy::ResourceClass::SENSITIVE_CONFIG:
    case policy::ResourceClass::USER_DATA:
      return {Provenance::TRUSTED_OPERATOR, Sensitivity::INTERNAL};
    case policy::ResourceClass::PUBLIC:
      return {Provenance::TRUSTED_OPERATOR, Sensitivity::PUBLIC};
  }
  return {};
}

void TrajectoryGraph::register_external_artifact(const std::string& id, TaintLabel taint,
                                                 const std::string& locator) {
  ArtifactInfo info;
  info.own = taint;
  info.current = taint;
  info.locator = locator;
  artifacts_[id] = std::move(info);
}

void TrajectoryGraph::raise_artifact_taint(const std::string& id, TaintLabel taint) {
  const auto it = artifacts_.find(id);
  if (it == artifacts_.end()) return;
  it->second.own = join(it->second.own, taint);
  it->second.current = join(it->second.current, taint);
}

Status TrajectoryGraph::append_action(AtomicAction action) {
  if (!nodes_.empty() && action.seq <= nodes_.back().seq) {
    return Status::failure("NON_MONOTONE_SEQ", "action seq must exceed all existing seqs");
  }
  for (const auto& id : action.consumed_artifacts) {
    if (artifacts_.find(id) == artifacts_.end()) {
      return Status::failure("UNKNOWN_ARTIFACT", "consumed artifact never produced: " + id);
    }
  }

  const std::size_t node_index = nodes_.size();
  TaintLabel inputs = action.descriptor.taint;
  for (const auto& id : action.consumed_artifacts) {
    inputs = join(inputs, artifacts_.at(id).current);
    const auto producer = producer_node_.find(id);
    if (producer != producer_node_.end()) {
      edges_.push_back({producer->second, node_index});
    }
  }

  if (!action.produced_artifact.empty()) {
    ArtifactInfo info;
    info.own = join(action.descriptor.taint,
                    class_derived_taint(action.descriptor.resource_class));
    info.current = join(inputs, class_derived_taint(action.descriptor.resource_class));
    info.locator = action.descriptor.resource;
    info.producer_seq = action.seq;
    artifacts_[action.produced_artifact] = std::move(info);
    producer_node_[action.produced_artifact] = node_index;
  }

  nodes_.push_back(std::move(action));
  return Status{};
}

void TrajectoryGraph::propagate_taint() {
  // reset to own taints, then run joins to the fixpoint; terminates because
  // the lattice is finite and joins are monotone
  for (auto& [_, info] : artifacts_) info.current = info.own;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& node : nodes_) {
      if (node.produced_artifact.empty()) continue;
      auto& produced = artifacts_.at(node.produced_artifact);
      TaintLabel next = join(produced.current, node.descriptor.taint);
      for (const auto& id : node.consumed_artifacts) {
        next = join(next, artifacts_.at(id).current);
      }
      if (!(next == produced.current)) {
        produced.current = next;
        changed = true;
      }
    }
  }
}

std::optional<TaintLabel> TrajectoryGraph::artifact_taint(const std::string& id) const {
  const auto it = artifacts_.find(id);
  if (it == artifacts_.end()) return std::nullopt;
  return it->second.current;
}

std::optional<std::string> TrajectoryGraph::artifact_by_locator(const std::string& locator) const {
  // latest producer wins when locators repeat
  std::optional<std::string> best;
  std::uint64_t best_seq = 0;
  for (const auto& [id, info] : artifacts_) {
    if (info.locator == locator && (!best || info.producer_seq >= best_seq)) {
      best = id;
      best_seq = info.producer_seq;
    }
  }
  return best;
}

namespace {

// Walk backwards from the sink, following consumed artifacts that carry the
// property, until a node that introduces it on its own. Each hop follows an
// existing producer->consumer edge, so the result is a valid graph path in
// ascending seq order. Sources external to the graph leave a single-node
// path.
std::vector<std::uint64_t> trace_source_path(
    const TrajectoryGraph& graph, std::size_t sink_index,
    const std::function<bool(const ArtifactInfo&)>& carries,
    const std::function<bool(const ArtifactInfo&)>& introduces) {
  const auto& nodes = graph.nodes();
  std::vector<std::uint64_t> reversed = {nodes[sink_index].seq};
  std::size_t cursor = sink_index;
  while (reversed.size() <= nodes.size()) {
    std::optional<std::size_t> pred;
    for (const auto& id : nodes[cursor].consumed_artifacts) {
      if (!carries(graph.artifacts().at(id))) continue;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].produced_artifact == id) {
          pred = i;
          break;
        }
      }
      if (pred) break;
    }
    if (!pred) break;
    reversed.push_back(nodes[*pred].seq);
    cursor = *pred;
    if (introduces(graph.artifacts().at(nodes[cursor].produced_artifact))) break;
  }
  std::reverse(reversed.begin(), reversed.end());
  return reversed;
}

}  // namespace

std::vector<ChainFinding> detect_stac(const TrajectoryGraph& graph,
                                      const policy::CapabilityProfile& profile,
                                      const ChainRules& rules) {
  std::vector<ChainFinding> findings;
  const auto& nodes = graph.nodes();

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const AtomicAction& node = nodes[i];

    if (rules.secret_egress && node.descriptor.category == policy::ActionCategory::NETWORK_SEND) {
      bool secret_input = false;
      for (const auto& id : node.consumed_artifacts) {
        const auto taint = graph.artifact_taint(id);
        if (taint && taint->sensitivity == Sensitivity::SECRET) secret_input = true;
      }
      if (secret_input) {
        const bool allowlisted = std::any_of(
            profile.egress_allowlist.begin(), profile.egress_allowlist.end(),
            [&](const std::string& pat) { return host_match(pat, node.descriptor.resource); });
        if (!allowlisted) {
          ChainFinding f;
          f.rule_id = "stac.s1";
          f.severity = Severity::CRITICAL;
          f.source_class = "SECRET artifact";
          f.sink_class = "NETWORK_SEND " + node.descriptor.resource;
          f.node_path = trace_source_path(
              graph, i,
              [](const ArtifactInfo& a) { return a.current.sensitivity == Sensitivity::SECRET; },
              [](const ArtifactInfo& a) { return a.own.sensitivity == Sensitivity::SECRET; });
          f.message = "secret-tainted data sent to non-allowlisted destination " +
                      node.descriptor.resource;
          findings.push_back(std::move(f));
        }
      }
    }

    if (rules.tainted_execute && node.descriptor.category == policy::ActionCategory::EXECUTE) {
      TaintLabel inputs = node.descriptor.taint;
      for (const auto& id : node.consumed_artifacts) {
        if (const auto taint = graph.artifact_taint(id)) inputs = join(inputs, *taint);
      }
      if (inputs.provenance >= rules.execute_min_provenance) {
        ChainFinding f;
        f.rule_id = "stac.s2";
        f.severity = Severity::HIGH;
        f.source_class = std::string(provenance_name(inputs.provenance)) + " input";
        f.sink_class = "EXECUTE";
        f.node_path = trace_source_path(
            graph, i,
            [&](const ArtifactInfo& a) {
              return a.current.provenance >= rules.execute_min_provenance;
            },
            [&](const ArtifactInfo& a) {
              return a.own.provenance >= rules.execute_min_provenance;
            });
        f.message = "instruction-bearing input reached execution";
        findings.push_back(std::move(f));
      }
    }

    if (rules.memory_pollution &&
        node.descriptor.category == policy::ActionCategory::WRITE_LOCAL &&
        glob_match(rules.memory_dir_pattern, node.descriptor.resource)) {
      TaintLabel inputs = node.descriptor.taint;
      for (const auto& id : node.consumed_artifacts) {
        if (const auto taint = graph.artifact_taint(id)) inputs = join(inputs, *taint);
      }
      if (inputs.provenance == Provenance::UNTRUSTED_EXTERNAL) {
        ChainFinding f;
        f.rule_id = "stac.s3";
        f.severity = Severity::HIGH;
        f.source_class = "UNTRUSTED_EXTERNAL input";
        f.sink_class = "memory write " + node.descriptor.resource;
        f.node_path = trace_source_path(
            graph, i,
            [](const ArtifactInfo& a) {
              return a.current.provenance == Provenance::UNTRUSTED_EXTERNAL;
            },
            [](const ArtifactInfo& a) {
              return a.own.provenance == Provenance::UNTRUSTED_EXTERNAL;
            });
        f.message = "untrusted data written into the agent memory directory";
        findings.push_back(std::move(f));
      }
    }
  }
  return findings;
}

VerbLexicon default_verb_lexicon() {
  using policy::ActionCategory;
  VerbLexicon lex;
  lex.version = 1;
  const auto add = [&](std::initializer_list<const char*> verbs,
                       std::vector<ActionCategory> cats) {
    for (const char* v : verbs) lex.verbs[v] = cats;
  };
  add({"summarize", "analyze", "review", "compress", "inspect"}, {ActionCategory::ANALYZE});
  add({"fetch", "browse", "download"}, {ActionCategory::NETWORK_FETCH});
  add({"send", "post", "upload", "email"},
      {ActionCategory::NETWORK_SEND, ActionCategory::COMMUNICATE});
  add({"delete", "remove", "clean"}, {ActionCategory::DELETE});
  add({"run", "execute", "install"}, {ActionCategory::EXECUTE});
  add({"read", "open", "list", "recall", "remember"}, {ActionCategory::READ_LOCAL});
  add({"write", "save"}, {ActionCategory::WRITE_LOCAL});
  add({"message", "notify", "tell"}, {ActionCategory::COMMUNICATE});
  return lex;
}

Result<VerbLexicon> verb_lexicon_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version") || !j.contains("verbs")) {
    return Result<VerbLexicon>::failure("MALFORMED", "verb lexicon requires version and verbs");
  }
  VerbLexicon lex;
  lex.version = j["version"].get<int>();
  for (const auto& [verb, cats] : j["verbs"].items()) {
    std::vector<policy::ActionCategory> mapped;
    for (const auto& c : cats) {
      const auto cat = policy::category_from_name(c.get<std::string>());
      if (!cat) return Result<VerbLexicon>::failure("MALFORMED", "unknown category for " + verb);
      mapped.push_back(*cat);
    }
    lex.verbs[verb] = std::move(mapped);
  }
  return lex;
}

nlohmann::json verb_lexicon_to_json(const VerbLexicon& lex) {
  nlohmann::json verbs = nlohmann::json::object();
  for (const auto& [verb, cats] : lex.verbs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto c : cats) arr.push_back(std::string(policy::category_name(c)));
    verbs[verb] = std::move(arr);
  }
  return {{"version", lex.version}, {"verbs", std::move(verbs)}};
}

namespace {

std::vector<std::string> lemma_candidates(const std::string& token) {
  std::vector<std::string> out = {token};
  const auto n = token.size();
  if (n > 4 && token.ends_with("ing")) {
    out.push_back(token.substr(0, n - 3));
    out.push_back(token.substr(0, n - 3) + "e");
  }
  if (n > 3 && token.ends_with("ed")) {
    out.push_back(token.substr(0, n - 2));
    out.push_back(token.substr(0, n - 1));  // "saved" -> "save"
  }
  if (n > 3 && token.ends_with("es")) out.push_back(token.substr(0, n - 2));
  if (n > 2 && token.ends_with("s")) out.push_back(token.substr(0, n - 1));
  return out;
}

}  // namespace

IntentProfile LexiconIntentClassifier::extract(const std::string& reasoning_excerpt) const {
  IntentProfile out;
  out.extraction_version = lexicon_.version;
  std::string token;
  const auto flush = [&] {
    if (token.empty()) return;
    for (const auto& candidate : lemma_candidates(token)) {
      const auto it = lexicon_.verbs.find(candidate);
      if (it != lexicon_.verbs.end()) {
        out.declared_categories.insert(it->second.begin(), it->second.end());
        break;
      }
    }
    token.clear();
  };
  for (char c : reasoning_excerpt) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

IntentProfile extract_intent(const std::string& reasoning_excerpt, const VerbLexicon& lexicon) {
  return LexiconIntentClassifier(lexicon).extract(reasoning_excerpt);
}

CorrelationVerdict correlate(const IntentProfile& intent,
                             const policy::ActionDescriptor& action) {
  using policy::ActionCategory;
  CorrelationVerdict out;

  if (intent.declared_categories.empty()) {
    out.status = CorrelationStatus::MISMATCH;
    out.disposition = Disposition::FLAG;
    out.finding = Finding{"corr.no_intent", Severity::MED, action.tool,
                          "no intent could be extracted from the reasoning trace"};
    return out;
  }

  std::set<ActionCategory> closure = intent.declared_categories;
  if (closure.count(ActionCategory::ANALYZE)) closure.insert(ActionCategory::READ_LOCAL);

  if (closure.count(action.category)) {
    out.status = CorrelationStatus::CONSISTENT;
    out.disposition = Disposition::ALLOW;
    return out;
  }

  out.status = CorrelationStatus::MISMATCH;
  const bool critical = action.category == ActionCategory::NETWORK_SEND ||
                        action.category == ActionCategory::EXECUTE ||
                        action.category == ActionCategory::DELETE;
  const Severity severity = critical ? Severity::CRITICAL : Severity::HIGH;
  out.disposition = disposition_for_severity(severity);
  out.finding = Finding{"corr.mismatch", severity, action.tool,
                        "declared intent does not cover " +
                            std::string(policy::category_name(action.category))};
  return out;
}

}  // namespace clawguard::trajectory
