#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clawguard/common.hpp"
#include "clawguard/lexicon.hpp"
#include "clawguard/policy.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard::audit {

struct CapabilityClaim {
  policy::ActionCategory category = policy::ActionCategory::ANALYZE;
  std::string resource;

  bool operator==(const CapabilityClaim&) const = default;
};

struct SkillManifest {
  std::string name;
  std::string version;
  std::string description;
  std::string publisher;
  std::string entry_script;  // relative path inside the package
  std::vector<CapabilityClaim> declared_capabilities;
  std::optional<std::string> content_digest;  // hex sha-256 over package bytes
};

enum class AuditDisposition { ADMIT, ADMIT_WITH_FLAGS, REJECT };

std::string_view audit_disposition_name(AuditDisposition d);

struct AuditVerdict {
  AuditDisposition disposition = AuditDisposition::ADMIT;
  std::vector<Finding> findings;
  std::vector<CapabilityClaim> undeclared_capabilities;
};

Result<SkillManifest> parse_manifest(const std::string& bytes);
nlohmann::json manifest_to_json(const SkillManifest& m);

// Skill descriptions are untrusted text: the injection rules run plus the
// auditor-specific inducement/trust-claim rules.
std::vector<Finding> audit_description(const std::string& text, const Lexicon& lexicon);

struct ScriptAudit {
  std::vector<Finding> findings;
  std::vector<CapabilityClaim> inferred;
};

// Lexical line-anchored scan; language agnostic by design. Pure function of
// the source text.
Result<ScriptAudit> audit_script(const std::string& source, const SkillManifest& manifest,
                                 const policy::SensitivePathList& sensitive,
                                 const Lexicon& lexicon);

struct SkillPackage {
  SkillManifest manifest;
  std::string script_source;
  std::string computed_digest;  // hex
  std::string root;
};

// Package = directory with a `manifest.json` (or `manifest`) document at the
// root. The digest covers every file except the manifest itself.
Result<SkillPackage> load_package(const std::string& dir);

std::string package_digest(const std::string& dir);

// Append-only admission record; quarantine removes a skill from the active
// set without rewriting history.
class AdmissionLedger {
public:
  AdmissionLedger() = default;
  static Result<AdmissionLedger> open(const std::string& path);

  Status record_admit(const std::string& name, const std::string& version,
                      const std::string& digest, const Clock& clock);
  void record_quarantine(const std::string& name, const std::string& version, const Clock& clock);
  bool active(const std::string& name, const std::string& version) const;
  std::optional<std::string> digest_of(const std::string& name, const std::string& version) const;
  std::size_t record_count() const { return records_.size(); }

private:
  void persist(const nlohmann::json& record);

  std::vector<nlohmann::json> records_;
  std::string path_;
};

AuditVerdict admit(const SkillPackage& package, const policy::SensitivePathList& sensitive,
                   const Lexicon& lexicon, AdmissionLedger& ledger, const Clock& clock);

}  // namespace clawguard::audit
