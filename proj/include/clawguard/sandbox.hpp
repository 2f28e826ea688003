#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "clawguard/common.hpp"
#include "clawguard/policy.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard::sandbox {

enum class EventKind { FS_READ, FS_WRITE, FS_DELETE, PROC_SPAWN, NET_CONNECT, NET_SEND };
enum class EventOutcome { PERMITTED, BLOCKED };

inline constexpr EventKind kAllEventKinds[] = {EventKind::FS_READ,    EventKind::FS_WRITE,
                                               EventKind::FS_DELETE,  EventKind::PROC_SPAWN,
                                               EventKind::NET_CONNECT, EventKind::NET_SEND};

std::string_view event_kind_name(EventKind k);
std::optional<EventKind> event_kind_from_name(std::string_view name);

// Every mediated operation emits exactly one of these, blocked ones included.
// Targets and byte counts only; payload content never enters the log.
struct ResourceEvent {
  std::string session;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::FS_READ;
  std::string target;
  EventOutcome outcome = EventOutcome::PERMITTED;
  std::optional<std::size_t> bytes;
  std::string timestamp;
  bool flagged_for_review = false;
};

nlohmann::json event_to_json(const ResourceEvent& e);

// In-memory tree of named byte buffers; the default execution backend.
class VirtualFs {
public:
  void put(const std::string& path, std::string content);
  std::optional<std::string> get(const std::string& path) const;
  bool remove(const std::string& path);
  bool exists(const std::string& path) const;
  std::vector<std::string> paths() const;

private:
  std::map<std::string, std::string> files_;
};

// Scripted host responders; unknown hosts answer with an empty body.
class VirtualNet {
public:
  void script(const std::string& host, std::string response);
  std::string request(const std::string& host) const;
  bool known(const std::string& host) const;

private:
  std::map<std::string, std::string> responders_;
};

struct FsViewEntry {
  std::string path;  // concrete normalized path
  bool writable = false;
};

struct SandboxSpec {
  std::vector<FsViewEntry> fs_view;
  std::vector<std::string> net_view;  // hosts
  bool allow_spawn = false;
  std::string derived_from;  // verdict id
};

struct MediateOp {
  EventKind kind = EventKind::FS_READ;
  std::string target;
  std::string payload;  // written/sent bytes
};

struct MediateOutcome {
  EventOutcome outcome = EventOutcome::BLOCKED;
  ResourceEvent event;
  std::optional<std::string> artifact_locator;
  std::optional<std::string> artifact_content;
};

class TelemetryLog {
public:
  void set_sink(std::string path);
  void record_mediate_call();
  void append(const ResourceEvent& event);
  std::size_t event_count() const;
  std::size_t mediate_call_count() const;
  std::vector<ResourceEvent> events() const;

private:
  mutable std::mutex mutex_;
  std::vector<ResourceEvent> events_;
  std::size_t mediate_calls_ = 0;
  std::string sink_path_;
};

class GovernanceLog {
public:
  void set_sink(std::string path);
  void append(const std::string& kind, nlohmann::json payload);
  std::vector<nlohmann::json> records() const;

private:
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> records_;
  std::string sink_path_;
};

// One environment per tool invocation. Operations outside the provisioned
// view are blocked with no effect; everything emits telemetry.
class MediatedEnvironment {
public:
  MediatedEnvironment(SandboxSpec spec, VirtualFs& fs, VirtualNet& net, TelemetryLog& telemetry,
                      std::string session, std::uint64_t seq, bool flagged, Clock clock);

  MediateOutcome mediate(const MediateOp& op);
  const SandboxSpec& spec() const { return spec_; }
  bool flagged() const { return flagged_; }

private:
  bool op_in_view(const MediateOp& op) const;

  SandboxSpec spec_;
  VirtualFs& fs_;
  VirtualNet& net_;
  TelemetryLog& telemetry_;
  std::string session_;
  std::uint64_t seq_;
  bool flagged_;
  Clock clock_;
};

// Build the least-privilege spec for one classified call from the tool's
// operation plan plus the artifacts it consumes.
SandboxSpec derive_spec(const policy::ToolSpec& tool, const ToolCallRequest& call,
                        const std::vector<std::string>& consumed_locators,
                        std::string_view home);

// The requested view may not exceed what the profile allows for this action:
// file entries must be covered by an allow rule or belong to the action's own
// derived view; net entries must sit inside the egress allowlist.
Result<SandboxSpec> validate_spec(const SandboxSpec& requested, const SandboxSpec& action_minimal,
                                  const policy::CapabilityProfile& profile);

struct InvocationSummary {
  std::string profile_id;
  std::string tool;
  policy::ResourceClass resource_class = policy::ResourceClass::PUBLIC;
  std::map<EventKind, int> counts;
  bool any_permitted = false;
};

struct Alert {
  std::string rule_id;  // anomaly.a1 / anomaly.a2
  Severity severity = Severity::HIGH;
  std::string message;
};

// Ring of the last W per-invocation counts per (profile, tool, event kind);
// statistics are recomputed from the window alone, so identical event
// sequences always produce identical baselines.
class BehaviorBaselines {
public:
  static constexpr std::size_t kWindow = 50;
  static constexpr std::size_t kWarmup = 10;

  // Alerts are computed against the window before the invocation is folded in.
  std::vector<Alert> detect_anomaly(const InvocationSummary& summary) const;
  void update(const InvocationSummary& summary);

  void seed_window(const std::string& profile_id, const std::string& tool, EventKind kind,
                   const std::vector<int>& counts);
  struct Stats {
    std::size_t samples = 0;
    double mean = 0.0;
    double stddev = 0.0;  // population
  };
  std::optional<Stats> stats(const std::string& profile_id, const std::string& tool,
                             EventKind kind) const;
  bool pair_known(const std::string& tool, policy::ResourceClass cls) const;

  nlohmann::json to_json() const;
  static Result<BehaviorBaselines> from_json(const nlohmann::json& j);

private:
  static std::string window_key(const std::string& profile_id, const std::string& tool,
                                EventKind kind);
  static std::string pair_key(const std::string& tool, policy::ResourceClass cls);

  std::map<std::string, std::deque<int>> windows_;
  std::set<std::string> known_pairs_;
};

// Containment decisions for an alert or a critical finding. A CRITICAL
// trajectory finding terminates the session; when a skill is implicated the
// skill is quarantined as well. TERMINATE and QUARANTINE take effect only
// after the caller logs them.
std::vector<MitigationAction> decide_mitigations(const Finding& finding, bool skill_attributed);
MitigationAction decide_mitigation(const Alert& alert);

}  // namespace clawguard::sandbox
