#include "clawguard/sandbox.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "clawguard/paths.hpp"

namespace clawguard::sandbox {

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::FS_READ: return "FS_READ";
    case EventKind::FS_WRITE: return "FS_WRITE";
    case EventKind::FS_DELETE: return "FS_DELETE";
    case EventKind::PROC_SPAWN: return "PROC_SPAWN";
    case EventKind::NET_CONNECT: return "NET_CONNECT";
    case EventKind::NET_SEND: return "NET_SEND";
  }
  return "UNKNOWN";
}

std::optional<EventKind> event_kind_from_name(std::string_view name) {
  for (EventKind k : kAllEventKinds) {
    if (event_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

nlohmann::json event_to_json(const ResourceEvent& e) {
  nlohmann::json j = {{"session", e.session},
                      {"seq", e.seq},
                      {"kind", std::string(event_kind_name(e.kind))},
                      {"target", e.target},
                      {"outcome", e.outcome == EventOutcome::PERMITTED ? "PERMITTED" : "BLOCKED"},
                      {"timestamp", e.timestamp}};
  if (e.bytes) j["bytes"] = *e.bytes;
  if (e.flagged_for_review) j["flagged_for_review"] = true;
  return j;
}

void VirtualFs::put(const std::string& path, std::string content) {
  files_[path] = std::move(content);
}

std::optional<std::string> VirtualFs::get(const std::string& path) const {
  const auto it = files_.find(path);
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

bool VirtualFs::remove(const std::string& path) {
  return files_.erase(path) > 0;
}

bool VirtualFs::exists(const std::string& path) const {
  return files_.count(path) > 0;
}

std::vector<std::string> VirtualFs::paths() const {
  std::vector<std::string> out;
  for (const auto& [p, _] : files_) out.push_back(p);
  return out;
}

void VirtualNet::script(const std::string& host, std::string response) {
  responders_[to_lower(host)] = std::move(response);
}

std::string VirtualNet::request(const std::string& host) const {
  const auto it = responders_.find(to_lower(host));
  return it == responders_.end() ? std::string{} : it->second;
}

bool VirtualNet::known(const std::string& host) const {
  return responders_.count(to_lower(host)) > 0;
}

void TelemetryLog::set_sink(std::string path) {
  std::lock_guard lock(mutex_);
  sink_path_ = std::move(path);
}

void TelemetryLog::record_mediate_call() {
  std::lock_guard lock(mutex_);
  ++mediate_calls_;
}

void TelemetryLog::append(const ResourceEvent& event) {
  std::lock_guard lock(mutex_);
  events_.push_back(event);
  if (!sink_path_.empty()) {
    std::ofstream out(sink_path_, std::ios::app);
    out << event_to_json(event).dump() << "\n";
  }
}

std::size_t TelemetryLog::event_count() const {
  std::lock_guard lock(mutex_);
  return events_.size();
}

std::size_t TelemetryLog::mediate_call_count() const {
  std::lock_guard lock(mutex_);
  return mediate_calls_;
}

std::vector<ResourceEvent> TelemetryLog::events() const {
  std::lock_guard lock(mutex_);
  return events_;
}

void GovernanceLog::set_sink(std::string path) {
  std::lock_guard lock(mutex_);
  sink_path_ = std::move(path);
}

void GovernanceLog::append(const std::string& kind, nlohmann::json payload) {
  std::lock_guard lock(mutex_);
  nlohmann::json record = {{"kind", kind}, {"detail", std::move(payload)}};
  records_.push_back(record);
  if (!sink_path_.empty()) {
    std::ofstream out(sink_path_, std::ios::app);
    out << record.dump() << "\n";
  }
}

std::vector<nlohmann::json> GovernanceLog::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

MediatedEnvironment::MediatedEnvironment(SandboxSpec spec, VirtualFs& fs, VirtualNet& net,
                                         TelemetryLog& telemetry, std::string session,
                                         std::uint64_t seq, bool flagged, Clock clock)
    : spec_(std::move(spec)),
      fs_(fs),
      net_(net),
      telemetry_(telemetry),
      session_(std::move(session)),
      seq_(seq),
      flagged_(flagged),
      clock_(std::move(clock)) {}

bool MediatedEnvironment::op_in_view(const MediateOp& op) const {
  switch (op.kind) {
    case EventKind::FS_READ:
      return std::any_of(spec_.fs_view.begin(), spec_.fs_view.end(),
                         [&](const FsViewEntry& e) { return e.path == op.target; });
    case EventKind::FS_WRITE:
    case EventKind::FS_DELETE:
      return std::any_of(spec_.fs_view.begin(), spec_.fs_view.end(), [&](const FsViewEntry& e) {
        return e.path == op.target && e.writable;
      });
    case EventKind::NET_CONNECT:
    case EventKind::NET_SEND:
      return std::any_of(spec_.net_view.begin(), spec_.net_view.end(),
                         [&](const std::string& host) { return host_match(host, op.target); });
    case EventKind::PROC_SPAWN:
      return spec_.allow_spawn;
  }
  return false;
}

MediateOutcome MediatedEnvironment::mediate(const MediateOp& op) {
  telemetry_.record_mediate_call();

  MediateOutcome out;
  out.event.session = session_;
  out.event.seq = seq_;
  out.event.kind = op.kind;
  out.event.target = op.target;
  out.event.timestamp = iso8601_utc(clock_());
  out.event.flagged_for_review = flagged_;

  if (!op_in_view(op)) {
    out.outcome = EventOutcome::BLOCKED;
    out.event.outcome = EventOutcome::BLOCKED;
    telemetry_.append(out.event);
    return out;
  }

  out.outcome = EventOutcome::PERMITTED;
  out.event.outcome = EventOutcome::PERMITTED;
  switch (op.kind) {
    case EventKind::FS_READ: {
      const auto content = fs_.get(op.target);
      out.event.bytes = content ? content->size() : 0;
      if (content) {
        out.artifact_locator = op.target;
        out.artifact_content = *content;
      }
      break;
    }
    case EventKind::FS_WRITE:
      fs_.put(op.target, op.payload);
      out.event.bytes = op.payload.size();
      out.artifact_locator = op.target;
      out.artifact_content = op.payload;
      break;
    case EventKind::FS_DELETE:
      fs_.remove(op.target);
      break;
    case EventKind::NET_CONNECT: {
      const std::string response = net_.request(op.target);
      out.event.bytes = response.size();
      out.artifact_locator = op.target;
      out.artifact_content = response;
      break;
    }
    case EventKind::NET_SEND:
      out.event.bytes = op.payload.size();
      break;
    case EventKind::PROC_SPAWN:
      break;
  }
  telemetry_.append(out.event);
  return out;
}

SandboxSpec derive_spec(const policy::ToolSpec& tool, const ToolCallRequest& call,
                        const std::vector<std::string>& consumed_locators,
                        std::string_view home) {
  SandboxSpec spec;
  const auto arg_value = [&](const std::string& name) -> std::string {
    const auto it = call.args.find(name);
    return it == call.args.end() ? std::string{} : it->second.value;
  };
  for (const auto& step : tool.plan) {
    std::string target = arg_value(step.from_arg);
    if (step.from_arg == tool.resource_arg && !tool.resource_prefix.empty()) {
      target = tool.resource_prefix + target;
    }
    switch (step.op) {
      case policy::ToolOp::FS_READ:
        spec.fs_view.push_back({normalize_path(target, home), false});
        break;
      case policy::ToolOp::FS_WRITE:
      case policy::ToolOp::FS_DELETE:
        spec.fs_view.push_back({normalize_path(target, home), true});
        break;
      case policy::ToolOp::NET_CONNECT:
      case policy::ToolOp::NET_SEND:
        spec.net_view.push_back(url_host(target));
        break;
      case policy::ToolOp::PROC_SPAWN:
        spec.allow_spawn = true;
        break;
    }
  }
  // paths named inside command strings are attempts, not grants: the runtime
  // replays them as FS ops and the view decides their fate
  for (const auto& locator : consumed_locators) {
    spec.fs_view.push_back({locator, false});
  }
  // reads of paths inside the view the plan already writes stay deduplicated
  std::sort(spec.net_view.begin(), spec.net_view.end());
  spec.net_view.erase(std::unique(spec.net_view.begin(), spec.net_view.end()),
                      spec.net_view.end());
  return spec;
}

namespace {

bool profile_covers_entry(const policy::CapabilityProfile& profile, const FsViewEntry& entry) {
  using policy::ActionCategory;
  for (const auto& rule : profile.allowed) {
    const bool mode_ok =
        entry.writable
            ? (rule.category == ActionCategory::WRITE_LOCAL ||
               rule.category == ActionCategory::DELETE)
            : (rule.category == ActionCategory::READ_LOCAL ||
               rule.category == ActionCategory::WRITE_LOCAL ||
               rule.category == ActionCategory::ANALYZE);
    if (mode_ok && glob_match(rule.resource_pattern, entry.path)) return true;
  }
  return false;
}

}  // namespace

Result<SandboxSpec> validate_spec(const SandboxSpec& requested, const SandboxSpec& action_minimal,
                                  const policy::CapabilityProfile& profile) {
  for (const auto& entry : requested.fs_view) {
    const bool in_minimal = std::any_of(
        action_minimal.fs_view.begin(), action_minimal.fs_view.end(), [&](const FsViewEntry& e) {
          return e.path == entry.path && (e.writable || !entry.writable);
        });
    if (in_minimal || profile_covers_entry(profile, entry)) continue;
    return Result<SandboxSpec>::failure(
        "SPEC_VIOLATION", "requested view exceeds the profile: " + entry.path +
                              (entry.writable ? " (rw)" : " (ro)"));
  }
  for (const auto& host : requested.net_view) {
    const bool allowlisted =
        std::any_of(profile.egress_allowlist.begin(), profile.egress_allowlist.end(),
                    [&](const std::string& pat) { return host_match(pat, host); });
    // the action's own destination already passed the policy stage; the
    // egress allowlist constrains anything beyond it
    const bool in_minimal = std::find(action_minimal.net_view.begin(),
                                      action_minimal.net_view.end(),
                                      host) != action_minimal.net_view.end();
    if (!allowlisted && !in_minimal) {
      return Result<SandboxSpec>::failure("SPEC_VIOLATION",
                                          "net view outside the egress allowlist: " + host);
    }
  }
  if (requested.allow_spawn && !action_minimal.allow_spawn) {
    bool execute_allowed = std::any_of(
        profile.allowed.begin(), profile.allowed.end(), [](const policy::AllowRule& r) {
          return r.category == policy::ActionCategory::EXECUTE;
        });
    if (!execute_allowed) {
      return Result<SandboxSpec>::failure("SPEC_VIOLATION", "spawn not granted by the profile");
    }
  }
  return requested;
}

std::vector<Alert> BehaviorBaselines::detect_anomaly(const InvocationSummary& summary) const {
  std::vector<Alert> alerts;
  for (const auto& [kind, count] : summary.counts) {
    const auto st = stats(summary.profile_id, summary.tool, kind);
    if (!st || st->samples < kWarmup) continue;
    const double threshold = st->mean + 3.0 * st->stddev;
    if (count > threshold && count > st->mean + 2.0) {
      Alert a;
      a.rule_id = "anomaly.a1";
      a.severity = Severity::HIGH;
      a.message = std::string(event_kind_name(kind)) + " count " + std::to_string(count) +
                  " exceeds mean+3*std of " + summary.tool;
      alerts.push_back(std::move(a));
    }
  }
  if ((summary.resource_class == policy::ResourceClass::SENSITIVE_SECRET ||
       summary.resource_class == policy::ResourceClass::SENSITIVE_CONFIG) &&
      !pair_known(summary.tool, summary.resource_class)) {
    Alert a;
    a.rule_id = "anomaly.a2";
    a.severity = Severity::HIGH;
    a.message = "first observed " + summary.tool + " on " +
                std::string(policy::resource_class_name(summary.resource_class));
    alerts.push_back(std::move(a));
  }
  return alerts;
}

void BehaviorBaselines::update(const InvocationSummary& summary) {
  for (const auto& [kind, count] : summary.counts) {
    auto& window = windows_[window_key(summary.profile_id, summary.tool, kind)];
    window.push_back(count);
    while (window.size() > kWindow) window.pop_front();
  }
  if (summary.any_permitted) {
    known_pairs_.insert(pair_key(summary.tool, summary.resource_class));
  }
}

void BehaviorBaselines::seed_window(const std::string& profile_id, const std::string& tool,
                                    EventKind kind, const std::vector<int>& counts) {
  auto& window = windows_[window_key(profile_id, tool, kind)];
  window.assign(counts.begin(), counts.end());
  while (window.size() > kWindow) window.pop_front();
}

std::optional<BehaviorBaselines::Stats> BehaviorBaselines::stats(const std::string& profile_id,
                                                                 const std::string& tool,
                                                                 EventKind kind) const {
  const auto it = windows_.find(window_key(profile_id, tool, kind));
  if (it == windows_.end() || it->second.empty()) return std::nullopt;
  const auto& window = it->second;
  Stats st;
  st.samples = window.size();
  double sum = 0.0;
  for (int v : window) sum += v;
  st.mean = sum / static_cast<double>(window.size());
  double sq = 0.0;
  for (int v : window) sq += (v - st.mean) * (v - st.mean);
  st.stddev = std::sqrt(sq / static_cast<double>(window.size()));  // population
  return st;
}

bool BehaviorBaselines::pair_known(const std::string& tool, policy::ResourceClass cls) const {
  return known_pairs_.count(pair_key(tool, cls)) > 0;
}

std::string BehaviorBaselines::window_key(const std::string& profile_id, const std::string& tool,
                                          EventKind kind) {
  return profile_id + "|" + tool + "|" + std::string(event_kind_name(kind));
}

std::string BehaviorBaselines::pair_key(const std::string& tool, policy::ResourceClass cls) {
  return tool + "|" + std::string(policy::resource_class_name(cls));
}

nlohmann::json BehaviorBaselines::to_json() const {
  nlohmann::json windows = nlohmann::json::object();
  for (const auto& [key, window] : windows_) {
    windows[key] = std::vector<int>(window.begin(), window.end());
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : known_pairs_) pairs.push_back(p);
  return {{"windows", std::move(windows)}, {"known_pairs", std::move(pairs)}};
}

Result<BehaviorBaselines> BehaviorBaselines::from_json(const nlohmann::json& j) {
  BehaviorBaselines out;
  if (!j.is_object()) return Result<BehaviorBaselines>::failure("MALFORMED", "expected object");
  if (j.contains("windows")) {
    for (const auto& [key, counts] : j["windows"].items()) {
      auto& window = out.windows_[key];
      for (const auto& c : counts) window.push_back(c.get<int>());
      while (window.size() > kWindow) window.pop_front();
    }
  }
  if (j.contains("known_pairs")) {
    for (const auto& p : j["known_pairs"]) out.known_pairs_.insert(p.get<std::string>());
  }
  return out;
}

std::vector<MitigationAction> decide_mitigations(const Finding& finding, bool skill_attributed) {
  std::vector<MitigationAction> actions;
  if (finding.severity != Severity::CRITICAL) {
    actions.push_back({MitigationKind::NONE, finding.rule_id});
    return actions;
  }
  const bool trajectory_class =
      finding.rule_id.starts_with("stac.") || finding.rule_id.starts_with("corr.");
  if (trajectory_class) {
    actions.push_back({MitigationKind::TERMINATE_SESSION, finding.rule_id});
  }
  if (skill_attributed) {
    actions.push_back({MitigationKind::QUARANTINE_SKILL, finding.rule_id});
  }
  if (actions.empty()) actions.push_back({MitigationKind::NONE, finding.rule_id});
  return actions;
}

MitigationAction decide_mitigation(const Alert& alert) {
  MitigationAction action;
  action.reason_finding = alert.rule_id;
  action.kind =
      alert.rule_id == "anomaly.a1" ? MitigationKind::REVOKE_EGRESS : MitigationKind::NONE;
  return action;
}

}  // namespace clawguard::sandbox
