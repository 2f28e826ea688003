#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clawguard/common.hpp"
#include "clawguard/lexicon.hpp"
#include "clawguard/taint.hpp"
#include "clawguard/tool_call.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard::policy {

enum class ActionCategory {
  READ_LOCAL,
  WRITE_LOCAL,
  DELETE,
  NETWORK_FETCH,
  NETWORK_SEND,
  EXECUTE,
  COMMUNICATE,
  ANALYZE,
};

inline constexpr ActionCategory kAllCategories[] = {
    ActionCategory::READ_LOCAL,    ActionCategory::WRITE_LOCAL, ActionCategory::DELETE,
    ActionCategory::NETWORK_FETCH, ActionCategory::NETWORK_SEND, ActionCategory::EXECUTE,
    ActionCategory::COMMUNICATE,   ActionCategory::ANALYZE};

// Irreversible or exfiltrating categories fail closed when no rule matches.
bool default_denied(ActionCategory c);

enum class ResourceClass { SENSITIVE_SECRET, SENSITIVE_CONFIG, USER_DATA, PUBLIC };

struct ActionDescriptor {
  ActionCategory category = ActionCategory::ANALYZE;
  std::string resource;  // normalized path or host
  ResourceClass resource_class = ResourceClass::PUBLIC;
  TaintLabel taint;      // joined over argument labels
  std::string tool;      // originating tool name
};

struct SensitivePathEntry {
  std::string pattern;
  ResourceClass cls = ResourceClass::PUBLIC;
};

struct SensitivePathList {
  int version = 0;
  std::vector<SensitivePathEntry> entries;

  // First matching entry wins; no match is PUBLIC. `resource` must be
  // normalized already; patterns with "~" are expanded against `home`.
  ResourceClass classify(const std::string& resource, std::string_view home) const;
};

SensitivePathList default_sensitive_paths();
Result<SensitivePathList> sensitive_paths_from_json(const nlohmann::json& j);
nlohmann::json sensitive_paths_to_json(const SensitivePathList& list);

struct AllowRule {
  ActionCategory category = ActionCategory::ANALYZE;
  std::string resource_pattern;
};

// Effect is always DENY; removable only through an operator channel.
struct PinnedConstraint {
  std::string constraint_id;
  ActionCategory category = ActionCategory::DELETE;
  std::string resource_pattern;
  Provenance provenance = Provenance::TRUSTED_OPERATOR;
  std::string note;
};

struct CapabilityProfile {
  std::string profile_id;
  std::vector<AllowRule> allowed;
  std::vector<std::string> egress_allowlist;
  std::vector<PinnedConstraint> pinned;
  int version = 1;
  std::string home = "/home/u";
};

struct PolicyDecision {
  Disposition disposition = Disposition::FLAG;
  std::vector<std::string> matched_rules;
  std::vector<Finding> findings;
};

enum class ResourceKind { PATH, URL_HOST, RAW };

enum class ToolOp { FS_READ, FS_WRITE, FS_DELETE, NET_CONNECT, NET_SEND, PROC_SPAWN };

struct ToolOpTemplate {
  ToolOp op;
  std::string from_arg;  // argument naming the target
};

struct ToolSpec {
  std::string name;
  ActionCategory category = ActionCategory::ANALYZE;
  std::string resource_arg;
  ResourceKind resource_kind = ResourceKind::PATH;
  std::string resource_prefix;  // prepended to the argument value (e.g. "mailstore/")
  std::vector<ToolOpTemplate> plan;            // mediated ops the tool performs
  std::string content_arg;                     // argument carrying payload bytes, if any
  bool scan_command_paths = false;             // EXECUTE tools: touch paths named in the command
};

class ToolRegistry {
public:
  void add(ToolSpec spec);
  const ToolSpec* find(const std::string& name) const;
  std::vector<std::string> names() const;

private:
  std::map<std::string, ToolSpec> tools_;
};

ToolRegistry default_tool_registry();

Result<ActionDescriptor> classify_action(const ToolCallRequest& call,
                                         const ToolRegistry& registry,
                                         const SensitivePathList& sensitive,
                                         std::string_view home);

// Pinned denies first, then allow rules, then category defaults; a default
// FLAG on a sensitive resource escalates to DENY.
PolicyDecision evaluate(const ActionDescriptor& action, const CapabilityProfile& profile);

Result<CapabilityProfile> pin_constraint(const CapabilityProfile& profile,
                                         PinnedConstraint constraint, Provenance actor);
Result<CapabilityProfile> unpin_constraint(const CapabilityProfile& profile,
                                           const std::string& constraint_id, Provenance actor);

struct A2aResult {
  Verdict verdict;
  bool delivered = false;
  TaintLabel delivered_taint;
};

// Inter-agent message inspection: body runs through the injection rules with
// third-party provenance; override/trigger-action hits at HIGH or above stop
// delivery.
A2aResult check_a2a(const std::string& body, const CapabilityProfile& sender_profile,
                    const std::string& receiver_principal, const Lexicon& lexicon);

// Profiles are immutable values; the store keeps every version for audit.
class ProfileStore {
public:
  void put(CapabilityProfile profile);
  const CapabilityProfile* current(const std::string& profile_id) const;
  std::vector<int> versions(const std::string& profile_id) const;

private:
  std::map<std::string, std::vector<CapabilityProfile>> history_;
};

std::string_view category_name(ActionCategory c);
std::optional<ActionCategory> category_from_name(std::string_view name);
std::string_view resource_class_name(ResourceClass c);
std::optional<ResourceClass> resource_class_from_name(std::string_view name);

Result<CapabilityProfile> profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const CapabilityProfile& p);
Result<CapabilityProfile> load_profile_file(const std::string& path);

}  // namespace clawguard::policy
