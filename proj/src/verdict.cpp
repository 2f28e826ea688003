#include "clawguard/verdict.hpp"

#include <algorithm>

namespace clawguard {

bool Verdict::has_severity_at_least(Severity s) const {
  return std::any_of(findings.begin(), findings.end(),
                     [s](const Finding& f) { return f.severity >= s; });
}

void Verdict::add_finding(Finding f) {
  findings.push_back(std::move(f));
}

Severity escalate(Severity s) {
  return s == Severity::CRITICAL ? s : static_cast<Severity>(static_cast<int>(s) + 1);
}

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::LOW: return "LOW";
    case Severity::MED: return "MED";
    case Severity::HIGH: return "HIGH";
    case Severity::CRITICAL: return "CRITICAL";
  }
  return "UNKNOWN";
}

std::optional<Severity> severity_from_name(std::string_view name) {
  for (Severity s : {Severity::LOW, Severity::MED, Severity::HIGH, Severity::CRITICAL}) {
    if (severity_name(s) == name) return s;
  }
  return std::nullopt;
}

std::string_view disposition_name(Disposition d) {
  switch (d) {
    case Disposition::ALLOW: return "ALLOW";
    case Disposition::FLAG: return "FLAG";
    case Disposition::DENY: return "DENY";
  }
  return "UNKNOWN";
}

std::optional<Disposition> disposition_from_name(std::string_view name) {
  for (Disposition d : {Disposition::ALLOW, Disposition::FLAG, Disposition::DENY}) {
    if (disposition_name(d) == name) return d;
  }
  return std::nullopt;
}

std::string_view mitigation_name(MitigationKind m) {
  switch (m) {
    case MitigationKind::NONE: return "NONE";
    case MitigationKind::REVOKE_EGRESS: return "REVOKE_EGRESS";
    case MitigationKind::QUARANTINE_SKILL: return "QUARANTINE_SKILL";
    case MitigationKind::TERMINATE_SESSION: return "TERMINATE_SESSION";
  }
  return "UNKNOWN";
}

Disposition disposition_for_severity(Severity s) {
  switch (s) {
    case Severity::CRITICAL: return Disposition::DENY;
    case Severity::HIGH:
    case Severity::MED: return Disposition::FLAG;
    case Severity::LOW: return Disposition::ALLOW;
  }
  return Disposition::FLAG;
}

nlohmann::json finding_to_json(const Finding& f) {
  return {{"rule_id", f.rule_id},
          {"severity", severity_name(f.severity)},
          {"locator", f.locator},
          {"message", f.message}};
}

Finding finding_from_json(const nlohmann::json& j) {
  Finding f;
  f.rule_id = j.at("rule_id").get<std::string>();
  f.severity = severity_from_name(j.at("severity").get<std::string>()).value_or(Severity::LOW);
  f.locator = j.value("locator", "");
  f.message = j.value("message", "");
  return f;
}

nlohmann::json verdict_to_json(const Verdict& v) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : v.findings) findings.push_back(finding_to_json(f));
  nlohmann::json out = {{"disposition", disposition_name(v.disposition)},
                        {"stage", v.stage},
                        {"findings", std::move(findings)}};
  if (v.mitigation && v.mitigation->kind != MitigationKind::NONE) {
    out["mitigation"] = {{"kind", mitigation_name(v.mitigation->kind)},
                         {"reason", v.mitigation->reason_finding}};
  }
  return out;
}

Verdict verdict_from_json(const nlohmann::json& j) {
  Verdict v;
  v.disposition =
      disposition_from_name(j.at("disposition").get<std::string>()).value_or(Disposition::DENY);
  v.stage = j.value("stage", "");
  if (j.contains("findings")) {
    for (const auto& f : j["findings"]) v.findings.push_back(finding_from_json(f));
  }
  if (j.contains("mitigation")) {
    MitigationAction m;
    const std::string kind = j["mitigation"].value("kind", "NONE");
    for (MitigationKind k : {MitigationKind::NONE, MitigationKind::REVOKE_EGRESS,
                             MitigationKind::QUARANTINE_SKILL, MitigationKind::TERMINATE_SESSION}) {
      if (mitigation_name(k) == kind) m.kind = k;
    }
    m.reason_finding = j["mitigation"].value("reason", "");
    v.mitigation = m;
  }
  return v;
}

}  // namespace clawguard
