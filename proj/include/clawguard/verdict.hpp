#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace clawguard {

enum class Severity { LOW = 0, MED = 1, HIGH = 2, CRITICAL = 3 };

// Ordering is total: DENY > FLAG > ALLOW.
enum class Disposition { ALLOW = 0, FLAG = 1, DENY = 2 };

enum class MitigationKind { NONE, REVOKE_EGRESS, QUARANTINE_SKILL, TERMINATE_SESSION };

struct Finding {
  std::string rule_id;
  Severity severity = Severity::LOW;
  std::string locator;  // span, path, script line, or node path, rule dependent
  std::string message;

  bool operator==(const Finding&) const = default;
};

struct MitigationAction {
  MitigationKind kind = MitigationKind::NONE;
  std::string reason_finding;  // rule_id of the finding that triggered it
};

struct Verdict {
  Disposition disposition = Disposition::ALLOW;
  std::string stage;  // stage identifier that decided
  std::vector<Finding> findings;
  std::optional<MitigationAction> mitigation;

  bool has_severity_at_least(Severity s) const;
  void add_finding(Finding f);
};

Severity escalate(Severity s);  // one level up, capped at CRITICAL

std::string_view severity_name(Severity s);
std::optional<Severity> severity_from_name(std::string_view name);
std::string_view disposition_name(Disposition d);
std::optional<Disposition> disposition_from_name(std::string_view name);
std::string_view mitigation_name(MitigationKind m);

// Disposition a single finding forces on the stage that raised it:
// CRITICAL denies, HIGH/MED flag, LOW stays allow.
Disposition disposition_for_severity(Severity s);

nlohmann::json finding_to_json(const Finding& f);
Finding finding_from_json(const nlohmann::json& j);
nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

}  // namespace clawguard
