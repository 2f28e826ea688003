#include "clawguard/policy.hpp"

#include <algorithm>
#include <fstream>

#include "clawguard/paths.hpp"
#include "clawguard/sanitizer.hpp"

namespace clawguard::policy {

bool default_denied(ActionCategory c) {
  return c == ActionCategory::DELETE || c == ActionCategory::EXECUTE ||
         c == ActionCategory::NETWORK_SEND;
}

std::string_view category_name(ActionCategory c) {
  switch (c) {
    case ActionCategory::READ_LOCAL: return "READ_LOCAL";
    case ActionCategory::WRITE_LOCAL: return "WRITE_LOCAL";
    case ActionCategory::DELETE: return "DELETE";
    case ActionCategory::NETWORK_FETCH: return "NETWORK_FETCH";
    case ActionCategory::NETWORK_SEND: return "NETWORK_SEND";
    case ActionCategory::EXECUTE: return "EXECUTE";
    case ActionCategory::COMMUNICATE: return "COMMUNICATE";
    case ActionCategory::ANALYZE: return "ANALYZE";
  }
  return "UNKNOWN";
}

std::optional<ActionCategory> category_from_name(std::string_view name) {
  for (ActionCategory c : kAllCategories) {
    if (category_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view resource_class_name(ResourceClass c) {
  switch (c) {
    case ResourceClass::SENSITIVE_SECRET: return "SENSITIVE_SECRET";
    case ResourceClass::SENSITIVE_CONFIG: return "SENSITIVE_CONFIG";
    case ResourceClass::USER_DATA: return "USER_DATA";
    case ResourceClass::PUBLIC: return "PUBLIC";
  }
  return "UNKNOWN";
}

std::optional<ResourceClass> resource_class_from_name(std::string_view name) {
  for (ResourceClass c : {ResourceClass::SENSITIVE_SECRET, ResourceClass::SENSITIVE_CONFIG,
                          ResourceClass::USER_DATA, ResourceClass::PUBLIC}) {
    if (resource_class_name(c) == name) return c;
  }
  return std::nullopt;
}

ResourceClass SensitivePathList::classify(const std::string& resource,
                                          std::string_view home) const {
  for (const auto& e : entries) {
    const std::string pattern = normalize_path(e.pattern, home);
    if (glob_match(pattern, resource)) return e.cls;
  }
  return ResourceClass::PUBLIC;
}

SensitivePathList default_sensitive_paths() {
  SensitivePathList list;
  list.version = 1;
  list.entries = {
      {"~/.ssh/**", ResourceClass::SENSITIVE_SECRET},
      {"~/.aws/**", ResourceClass::SENSITIVE_SECRET},
      {"**/.env", ResourceClass::SENSITIVE_SECRET},
      {"/etc/shadow", ResourceClass::SENSITIVE_SECRET},
      {"/etc/**", ResourceClass::SENSITIVE_CONFIG},
      {"memory/**", ResourceClass::SENSITIVE_CONFIG},
      {"~/.clawguard/**", ResourceClass::SENSITIVE_CONFIG},
      {"mailstore/**", ResourceClass::USER_DATA},
      {"calendar/**", ResourceClass::USER_DATA},
  };
  return list;
}

Result<SensitivePathList> sensitive_paths_from_json(const nlohmann::json& j) {
  SensitivePathList list;
  if (!j.is_object() || !j.contains("version") || !j.contains("entries")) {
    return Result<SensitivePathList>::failure("MALFORMED",
                                              "sensitive path list requires version and entries");
  }
  list.version = j["version"].get<int>();
  for (const auto& e : j["entries"]) {
    SensitivePathEntry entry;
    entry.pattern = e.at("pattern").get<std::string>();
    const auto cls = resource_class_from_name(e.at("class").get<std::string>());
    if (!cls) return Result<SensitivePathList>::failure("MALFORMED", "unknown resource class");
    entry.cls = *cls;
    list.entries.push_back(std::move(entry));
  }
  return list;
}

nlohmann::json sensitive_paths_to_json(const SensitivePathList& list) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : list.entries) {
    entries.push_back(
        {{"pattern", e.pattern}, {"class", std::string(resource_class_name(e.cls))}});
  }
  return {{"version", list.version}, {"entries", std::move(entries)}};
}

void ToolRegistry::add(ToolSpec spec) {
  tools_[spec.name] = std::move(spec);
}

const ToolSpec* ToolRegistry::find(const std::string& name) const {
  const auto it = tools_.find(name);
  return it == tools_.end() ? nullptr : &it->second;
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : tools_) out.push_back(name);
  return out;
}

ToolRegistry default_tool_registry() {
  ToolRegistry reg;
  reg.add({"fs.read", ActionCategory::READ_LOCAL, "path", ResourceKind::PATH, "",
           {{ToolOp::FS_READ, "path"}}, "", false});
  reg.add({"fs.write", ActionCategory::WRITE_LOCAL, "path", ResourceKind::PATH, "",
           {{ToolOp::FS_WRITE, "path"}}, "content", false});
  reg.add({"fs.delete", ActionCategory::DELETE, "path", ResourceKind::PATH, "",
           {{ToolOp::FS_DELETE, "path"}}, "", false});
  reg.add({"mail.read", ActionCategory::READ_LOCAL, "folder", ResourceKind::PATH, "mailstore/",
           {{ToolOp::FS_READ, "folder"}}, "", false});
  reg.add({"mail.delete", ActionCategory::DELETE, "folder", ResourceKind::PATH, "mailstore/",
           {{ToolOp::FS_DELETE, "folder"}}, "", false});
  reg.add({"http.fetch", ActionCategory::NETWORK_FETCH, "url", ResourceKind::URL_HOST, "",
           {{ToolOp::NET_CONNECT, "url"}}, "", false});
  reg.add({"browser.fetch", ActionCategory::NETWORK_FETCH, "url", ResourceKind::URL_HOST, "",
           {{ToolOp::NET_CONNECT, "url"}}, "", false});
  reg.add({"http.post", ActionCategory::NETWORK_SEND, "url", ResourceKind::URL_HOST, "",
           {{ToolOp::NET_CONNECT, "url"}, {ToolOp::NET_SEND, "url"}}, "body", false});
  reg.add({"shell.run", ActionCategory::EXECUTE, "command", ResourceKind::RAW, "",
           {{ToolOp::PROC_SPAWN, "command"}}, "", true});
  reg.add({"archive.compress", ActionCategory::ANALYZE, "output", ResourceKind::PATH, "",
           {{ToolOp::FS_READ, "input"}, {ToolOp::FS_WRITE, "output"}}, "", false});
  reg.add({"text.summarize", ActionCategory::ANALYZE, "input", ResourceKind::RAW, "",
           {}, "", false});
  reg.add({"memory.recall", ActionCategory::READ_LOCAL, "entry_id", ResourceKind::PATH,
           "memory/", {}, "", false});
  reg.add({"msg.send", ActionCategory::COMMUNICATE, "channel", ResourceKind::RAW, "",
           {}, "body", false});
  return reg;
}

Result<ActionDescriptor> classify_action(const ToolCallRequest& call,
                                         const ToolRegistry& registry,
                                         const SensitivePathList& sensitive,
                                         std::string_view home) {
  const ToolSpec* spec = registry.find(call.tool);
  if (spec == nullptr) {
    return Result<ActionDescriptor>::failure("UNKNOWN_TOOL",
                                             "tool not registered: " + call.tool);
  }
  ActionDescriptor out;
  out.category = spec->category;
  out.tool = call.tool;

  std::string raw;
  if (const auto it = call.args.find(spec->resource_arg); it != call.args.end()) {
    raw = it->second.value;
  }
  switch (spec->resource_kind) {
    case ResourceKind::PATH:
      out.resource = normalize_path(spec->resource_prefix + raw, home);
      break;
    case ResourceKind::URL_HOST:
      out.resource = url_host(raw);
      break;
    case ResourceKind::RAW:
      out.resource = raw;
      break;
  }
  out.resource_class = spec->resource_kind == ResourceKind::PATH
                           ? sensitive.classify(out.resource, home)
                           : ResourceClass::PUBLIC;
  for (const auto& [_, arg] : call.args) out.taint = join(out.taint, arg.taint);
  return out;
}

namespace {

bool rule_matches(ActionCategory rule_category, const std::string& pattern,
                  const ActionDescriptor& action) {
  if (rule_category != action.category) return false;
  const bool host_semantics = action.category == ActionCategory::NETWORK_FETCH ||
                              action.category == ActionCategory::NETWORK_SEND;
  return host_semantics ? host_match(pattern, action.resource)
                        : glob_match(pattern, action.resource);
}

}  // namespace

PolicyDecision evaluate(const ActionDescriptor& action, const CapabilityProfile& profile) {
  PolicyDecision decision;

  // 1. pinned denies cannot be shadowed
  for (const auto& pin : profile.pinned) {
    if (rule_matches(pin.category, pin.resource_pattern, action)) {
      decision.disposition = Disposition::DENY;
      decision.matched_rules.push_back(pin.constraint_id);
      decision.findings.push_back({"policy.pin." + pin.constraint_id, Severity::HIGH,
                                   action.resource,
                                   "pinned constraint " + pin.constraint_id + " denies " +
                                       std::string(category_name(action.category))});
      return decision;
    }
  }

  // 2. first matching allow rule
  for (const auto& rule : profile.allowed) {
    if (rule_matches(rule.category, rule.resource_pattern, action)) {
      decision.disposition = Disposition::ALLOW;
      decision.matched_rules.push_back(std::string(category_name(rule.category)) + ":" +
                                       rule.resource_pattern);
      return decision;
    }
  }

  // 3. category default, with sensitive-resource escalation
  if (default_denied(action.category)) {
    decision.disposition = Disposition::DENY;
    decision.findings.push_back({"policy.default_deny", Severity::HIGH, action.resource,
                                 std::string(category_name(action.category)) +
                                     " denied by default (no allow rule)"});
    return decision;
  }
  if (action.resource_class == ResourceClass::SENSITIVE_SECRET ||
      action.resource_class == ResourceClass::SENSITIVE_CONFIG) {
    decision.disposition = Disposition::DENY;
    decision.findings.push_back(
        {"policy.sensitive_escalation", Severity::HIGH, action.resource,
         "unlisted access to " + std::string(resource_class_name(action.resource_class)) +
             " resource " + action.resource});
    return decision;
  }
  decision.disposition = Disposition::FLAG;
  decision.findings.push_back({"policy.default_flag", Severity::MED, action.resource,
                               std::string(category_name(action.category)) +
                                   " outside the profile allowlist"});
  return decision;
}

Result<CapabilityProfile> pin_constraint(const CapabilityProfile& profile,
                                         PinnedConstraint constraint, Provenance actor) {
  if (actor != Provenance::TRUSTED_OPERATOR) {
    return Result<CapabilityProfile>::failure("FORBIDDEN_PROVENANCE",
                                              "pins change only through the operator channel");
  }
  CapabilityProfile next = profile;
  constraint.provenance = actor;
  next.pinned.push_back(std::move(constraint));
  next.version = profile.version + 1;
  return next;
}

Result<CapabilityProfile> unpin_constraint(const CapabilityProfile& profile,
                                           const std::string& constraint_id, Provenance actor) {
  if (actor != Provenance::TRUSTED_OPERATOR) {
    return Result<CapabilityProfile>::failure("FORBIDDEN_PROVENANCE",
                                              "pins change only through the operator channel");
  }
  CapabilityProfile next = profile;
  std::erase_if(next.pinned, [&](const PinnedConstraint& p) {
    return p.constraint_id == constraint_id;
  });
  next.version = profile.version + 1;
  return next;
}

A2aResult check_a2a(const std::string& body, const CapabilityProfile& sender_profile,
                    const std::string& receiver_principal, const Lexicon& lexicon) {
  A2aResult out;
  out.verdict.stage = "a2a";
  out.delivered_taint = TaintLabel{Provenance::SKILL_THIRD_PARTY, Sensitivity::PUBLIC};

  ActionDescriptor msg_action;
  msg_action.category = ActionCategory::COMMUNICATE;
  msg_action.resource = receiver_principal;
  msg_action.tool = "a2a";
  const PolicyDecision policy = evaluate(msg_action, sender_profile);
  if (policy.disposition == Disposition::DENY) {
    out.verdict.disposition = Disposition::DENY;
    out.verdict.findings = policy.findings;
    return out;
  }

  const auto findings = sanitizer::detect_injection(lexicon, {body});
  bool blocked = false;
  for (const auto& f : findings) {
    const bool instruction_class =
        f.kind == RuleKind::TRIGGER_ACTION || f.rule_id == "inj.override_phrase";
    if (instruction_class && f.severity >= Severity::HIGH) blocked = true;
    out.verdict.findings.push_back(
        {f.rule_id, f.severity, "a2a message", f.message});
  }
  if (blocked) {
    out.verdict.disposition = Disposition::DENY;
    return out;
  }
  out.delivered = true;
  out.verdict.disposition = findings.empty() ? Disposition::ALLOW : Disposition::FLAG;
  return out;
}

void ProfileStore::put(CapabilityProfile profile) {
  history_[profile.profile_id].push_back(std::move(profile));
}

const CapabilityProfile* ProfileStore::current(const std::string& profile_id) const {
  const auto it = history_.find(profile_id);
  if (it == history_.end() || it->second.empty()) return nullptr;
  return &it->second.back();
}

std::vector<int> ProfileStore::versions(const std::string& profile_id) const {
  std::vector<int> out;
  const auto it = history_.find(profile_id);
  if (it == history_.end()) return out;
  for (const auto& p : it->second) out.push_back(p.version);
  return out;
}

Result<CapabilityProfile> profile_from_json(const nlohmann::json& j) {
  CapabilityProfile p;
  if (!j.is_object() || !j.contains("profile_id")) {
    return Result<CapabilityProfile>::failure("MALFORMED", "profile requires profile_id");
  }
  p.profile_id = j["profile_id"].get<std::string>();
  p.version = j.value("version", 1);
  p.home = j.value("home", "/home/u");
  if (j.contains("allowed")) {
    for (const auto& r : j["allowed"]) {
      const auto cat = category_from_name(r.at("category").get<std::string>());
      if (!cat) return Result<CapabilityProfile>::failure("MALFORMED", "unknown category");
      p.allowed.push_back({*cat, r.at("resource").get<std::string>()});
    }
  }
  if (j.contains("egress_allowlist")) {
    p.egress_allowlist = j["egress_allowlist"].get<std::vector<std::string>>();
  }
  if (j.contains("pinned")) {
    for (const auto& r : j["pinned"]) {
      PinnedConstraint pin;
      pin.constraint_id = r.at("constraint_id").get<std::string>();
      const auto cat = category_from_name(r.at("category").get<std::string>());
      if (!cat) return Result<CapabilityProfile>::failure("MALFORMED", "unknown category");
      pin.category = *cat;
      pin.resource_pattern = r.at("resource").get<std::string>();
      pin.note = r.value("note", "");
      p.pinned.push_back(std::move(pin));
    }
  }
  return p;
}

nlohmann::json profile_to_json(const CapabilityProfile& p) {
  nlohmann::json allowed = nlohmann::json::array();
  for (const auto& r : p.allowed) {
    allowed.push_back(
        {{"category", std::string(category_name(r.category))}, {"resource", r.resource_pattern}});
  }
  nlohmann::json pinned = nlohmann::json::array();
  for (const auto& r : p.pinned) {
    pinned.push_back({{"constraint_id", r.constraint_id},
                      {"category", std::string(category_name(r.category))},
                      {"resource", r.resource_pattern},
                      {"note", r.note}});
  }
  return {{"profile_id", p.profile_id}, {"version", p.version},
          {"home", p.home},            {"allowed", std::move(allowed)},
          {"egress_allowlist", p.egress_allowlist}, {"pinned", std::move(pinned)}};
}

Result<CapabilityProfile> load_profile_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Result<CapabilityProfile>::failure("IO_ERROR", "cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    return Result<CapabilityProfile>::failure("MALFORMED", "invalid json in " + path);
  }
  return profile_from_json(j);
}

}  // namespace clawguard::policy
