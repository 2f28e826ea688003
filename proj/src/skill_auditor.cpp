#include "clawguard/skill_auditor.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "clawguard/digest.hpp"
#include "clawguard/paths.hpp"
#include "clawguard/sanitizer.hpp"

namespace clawguard::audit {
namespace fs = std::filesystem;

std::string_view audit_disposition_name(AuditDisposition d) {
  switch (d) {
    case AuditDisposition::ADMIT: return "ADMIT";
    case AuditDisposition::ADMIT_WITH_FLAGS: return "ADMIT_WITH_FLAGS";
    case AuditDisposition::REJECT: return "REJECT";
  }
  return "UNKNOWN";
}

namespace {

bool contains_dotdot(const std::string& relative) {
  std::string segment;
  std::stringstream ss(relative);
  while (std::getline(ss, segment, '/')) {
    if (segment == "..") return true;
  }
  return false;
}

}  // namespace

Result<SkillManifest> parse_manifest(const std::string& bytes) {
  const auto j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Result<SkillManifest>::failure("MALFORMED", "manifest is not a valid document");
  }
  SkillManifest m;
  for (const char* field : {"name", "version", "description", "publisher", "entry_script"}) {
    if (!j.contains(field) || !j[field].is_string()) {
      return Result<SkillManifest>::failure("MISSING_FIELD",
                                            std::string("manifest field missing: ") + field);
    }
  }
  m.name = j["name"].get<std::string>();
  m.version = j["version"].get<std::string>();
  m.description = j["description"].get<std::string>();
  m.publisher = j["publisher"].get<std::string>();
  m.entry_script = j["entry_script"].get<std::string>();
  if (m.entry_script.empty() || m.entry_script.front() == '/' ||
      contains_dotdot(m.entry_script)) {
    return Result<SkillManifest>::failure("INVALID_PATH",
                                          "entry_script must resolve inside the package root");
  }
  if (!j.contains("capabilities") || !j["capabilities"].is_array() ||
      j["capabilities"].empty()) {
    return Result<SkillManifest>::failure("MISSING_FIELD",
                                          "capabilities must be a non-empty list");
  }
  for (const auto& c : j["capabilities"]) {
    const auto category = policy::category_from_name(c.value("category", ""));
    if (!category || !c.contains("resource")) {
      return Result<SkillManifest>::failure("MALFORMED", "bad capability claim");
    }
    m.declared_capabilities.push_back({*category, c["resource"].get<std::string>()});
  }
  if (j.contains("content_digest")) m.content_digest = j["content_digest"].get<std::string>();
  return m;
}

nlohmann::json manifest_to_json(const SkillManifest& m) {
  nlohmann::json caps = nlohmann::json::array();
  for (const auto& c : m.declared_capabilities) {
    caps.push_back({{"category", std::string(policy::category_name(c.category))},
                    {"resource", c.resource}});
  }
  nlohmann::json j = {{"name", m.name},
                      {"version", m.version},
                      {"description", m.description},
                      {"publisher", m.publisher},
                      {"entry_script", m.entry_script},
                      {"capabilities", std::move(caps)}};
  if (m.content_digest) j["content_digest"] = *m.content_digest;
  return j;
}

std::vector<Finding> audit_description(const std::string& text, const Lexicon& lexicon) {
  std::vector<Finding> out;
  for (const auto& f : sanitizer::detect_injection(lexicon, {text}, "inj.")) {
    out.push_back({f.rule_id, f.severity, "description", f.message});
  }
  for (const auto& f : sanitizer::detect_injection(lexicon, {text}, "aud.")) {
    out.push_back({f.rule_id, f.severity, "description", f.message});
  }
  return out;
}

namespace {

const std::regex& exec_regex() {
  static const std::regex re(
      R"(\b(system|popen|execve?|execl|spawn|subprocess|fork)\s*\(|os\.system|child_process|Runtime\.getRuntime|\bsh\s+-c\b|/bin/(sh|bash)\b)",
      std::regex::icase);
  return re;
}

const std::regex& url_literal_regex() {
  static const std::regex re(R"(https?://[^\s"'<>)]+)", std::regex::icase);
  return re;
}

const std::regex& send_idiom_regex() {
  static const std::regex re(R"(\.post\s*\(|\bupload\b|requests\.post|http\.client|curl\s+-\w*d)",
                             std::regex::icase);
  return re;
}

const std::regex& raw_ip_regex() {
  static const std::regex re(R"(\b\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}\b)");
  return re;
}

const std::regex& socket_regex() {
  static const std::regex re(R"(\bsocket\s*\(|\bconnect\s*\()", std::regex::icase);
  return re;
}

const std::regex& write_idiom_regex() {
  static const std::regex re(R"(open\s*\([^)]*['"]w|fs\.write|\bfwrite\b|>>\s|\bwrite_file\b)",
                             std::regex::icase);
  return re;
}

std::regex base64_run_regex(int min_run) {
  return std::regex("[A-Za-z0-9+/]{" + std::to_string(min_run) + ",}={0,2}");
}

std::string line_locator(std::size_t line_number) {
  return "script:" + std::to_string(line_number);
}

void add_claim(std::vector<CapabilityClaim>& claims, CapabilityClaim claim) {
  if (std::find(claims.begin(), claims.end(), claim) == claims.end()) {
    claims.push_back(std::move(claim));
  }
}

}  // namespace

Result<ScriptAudit> audit_script(const std::string& source, const SkillManifest& manifest,
                                 const policy::SensitivePathList& sensitive,
                                 const Lexicon& lexicon) {
  (void)manifest;
  if (!sanitizer::valid_utf8(source)) {
    return Result<ScriptAudit>::failure("DECODE_ERROR", "script is not valid UTF-8");
  }
  int blob_min_run = 64;
  if (const auto* blob_rule = lexicon.find("inj.encoded_blob")) {
    blob_min_run = blob_rule->min_run;
  }
  const std::regex blob_re = base64_run_regex(blob_min_run);
  ScriptAudit out;
  std::istringstream stream(source);
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(stream, line)) {
    ++line_number;
    std::smatch m;
    if (std::regex_search(line, exec_regex())) {
      out.findings.push_back({"aud.exec", Severity::HIGH, line_locator(line_number),
                              "process-execution idiom"});
      add_claim(out.inferred, {policy::ActionCategory::EXECUTE, "*"});
    }
    if (std::regex_search(line, m, url_literal_regex())) {
      const std::string host = url_host(m.str(0));
      const bool sends = std::regex_search(line, send_idiom_regex());
      out.findings.push_back({sends ? "aud.net_send" : "aud.net",
                              sends ? Severity::MED : Severity::LOW, line_locator(line_number),
                              std::string(sends ? "network send to " : "network fetch of ") +
                                  host});
      add_claim(out.inferred, {sends ? policy::ActionCategory::NETWORK_SEND
                                     : policy::ActionCategory::NETWORK_FETCH,
                               host});
    } else if (std::regex_search(line, m, raw_ip_regex())) {
      out.findings.push_back(
          {"aud.net", Severity::MED, line_locator(line_number), "raw IP literal " + m.str(0)});
      add_claim(out.inferred, {policy::ActionCategory::NETWORK_FETCH, m.str(0)});
    } else if (std::regex_search(line, socket_regex())) {
      out.findings.push_back(
          {"aud.net", Severity::MED, line_locator(line_number), "socket primitive"});
      add_claim(out.inferred, {policy::ActionCategory::NETWORK_FETCH, "*"});
    }
    for (const auto& entry : sensitive.entries) {
      if (entry.cls != policy::ResourceClass::SENSITIVE_SECRET &&
          entry.cls != policy::ResourceClass::SENSITIVE_CONFIG) {
        continue;
      }
      // match on the concrete prefix of the pattern (pattern minus globs)
      std::string prefix = entry.pattern;
      const auto star = prefix.find('*');
      if (star != std::string::npos) prefix = prefix.substr(0, star);
      while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
      if (prefix.size() >= 4 && line.find(prefix) != std::string::npos) {
        out.findings.push_back({"aud.sensitive_path", Severity::HIGH, line_locator(line_number),
                                "sensitive path literal " + prefix});
        add_claim(out.inferred, {policy::ActionCategory::READ_LOCAL, entry.pattern});
      }
    }
    if (std::regex_search(line, blob_re)) {
      out.findings.push_back(
          {"aud.blob", Severity::MED, line_locator(line_number), "encoded blob run"});
    }
    if (std::regex_search(line, write_idiom_regex()) &&
        (line.find("memory/") != std::string::npos || line.find("./") != std::string::npos)) {
      out.findings.push_back({"aud.self_modify", Severity::HIGH, line_locator(line_number),
                              "write into the package or agent memory directory"});
      add_claim(out.inferred, {policy::ActionCategory::WRITE_LOCAL,
                               line.find("memory/") != std::string::npos ? "memory/**" : "./**"});
    }
  }
  return out;
}

std::string package_digest(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == "manifest.json" || rel == "manifest") continue;
    paths.push_back(rel);
  }
  std::sort(paths.begin(), paths.end());
  std::string blob;
  for (const auto& rel : paths) {
    std::ifstream in(fs::path(dir) / rel, std::ios::binary);
    const std::string content{std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>()};
    blob += rel;
    blob += '\n';
    blob += content;
    blob += '\n';
  }
  return digest_hex(sha256(blob));
}

Result<SkillPackage> load_package(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    return Result<SkillPackage>::failure("MALFORMED", "not a package directory: " + dir);
  }
  std::string manifest_path;
  for (const char* candidate : {"manifest.json", "manifest"}) {
    if (fs::exists(fs::path(dir) / candidate)) {
      manifest_path = (fs::path(dir) / candidate).string();
      break;
    }
  }
  if (manifest_path.empty()) {
    return Result<SkillPackage>::failure("MALFORMED", "no manifest document at package root");
  }
  std::ifstream min(manifest_path, std::ios::binary);
  const std::string manifest_bytes{std::istreambuf_iterator<char>(min),
                                   std::istreambuf_iterator<char>()};
  auto manifest = parse_manifest(manifest_bytes);
  if (!manifest.ok()) {
    return Result<SkillPackage>::failure(manifest.error().code, manifest.error().message);
  }

  SkillPackage pkg;
  pkg.manifest = manifest.take();
  pkg.root = dir;

  const fs::path script_path = fs::path(dir) / pkg.manifest.entry_script;
  if (!fs::exists(script_path)) {
    return Result<SkillPackage>::failure("MISSING_FIELD",
                                         "entry script not found: " + pkg.manifest.entry_script);
  }
  std::ifstream sin(script_path, std::ios::binary);
  pkg.script_source = {std::istreambuf_iterator<char>(sin), std::istreambuf_iterator<char>()};

  pkg.computed_digest = package_digest(dir);
  if (pkg.manifest.content_digest && *pkg.manifest.content_digest != pkg.computed_digest) {
    return Result<SkillPackage>::failure(
        "DIGEST_MISMATCH", "package bytes do not match the manifest digest (tampering?)");
  }
  return pkg;
}

Result<AdmissionLedger> AdmissionLedger::open(const std::string& path) {
  AdmissionLedger ledger;
  ledger.path_ = path;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      return Result<AdmissionLedger>::failure("MALFORMED", "corrupt ledger line");
    }
    ledger.records_.push_back(j);
  }
  return ledger;
}

void AdmissionLedger::persist(const nlohmann::json& record) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  out << record.dump() << "\n";
}

Status AdmissionLedger::record_admit(const std::string& name, const std::string& version,
                                     const std::string& digest, const Clock& clock) {
  const auto existing = digest_of(name, version);
  if (existing && *existing != digest) {
    return Status::failure("DIGEST_CONFLICT",
                           name + "@" + version + " already admitted with a different digest");
  }
  if (existing) return Status{};  // idempotent re-admit
  nlohmann::json record = {{"action", "admit"},
                           {"name", name},
                           {"version", version},
                           {"digest", digest},
                           {"at", iso8601_utc(clock())}};
  records_.push_back(record);
  persist(record);
  return Status{};
}

void AdmissionLedger::record_quarantine(const std::string& name, const std::string& version,
                                        const Clock& clock) {
  nlohmann::json record = {{"action", "quarantine"},
                           {"name", name},
                           {"version", version},
                           {"at", iso8601_utc(clock())}};
  records_.push_back(record);
  persist(record);
}

bool AdmissionLedger::active(const std::string& name, const std::string& version) const {
  bool admitted = false;
  for (const auto& r : records_) {
    if (r.value("name", "") != name || r.value("version", "") != version) continue;
    if (r.value("action", "") == "admit") admitted = true;
    if (r.value("action", "") == "quarantine") admitted = false;
  }
  return admitted;
}

std::optional<std::string> AdmissionLedger::digest_of(const std::string& name,
                                                      const std::string& version) const {
  std::optional<std::string> out;
  for (const auto& r : records_) {
    if (r.value("action", "") == "admit" && r.value("name", "") == name &&
        r.value("version", "") == version) {
      out = r.value("digest", "");
    }
  }
  return out;
}

namespace {

bool claim_covered(const CapabilityClaim& inferred,
                   const std::vector<CapabilityClaim>& declared) {
  return std::any_of(declared.begin(), declared.end(), [&](const CapabilityClaim& d) {
    if (d.category != inferred.category) return false;
    if (d.resource == inferred.resource) return true;
    const bool host_semantics = d.category == policy::ActionCategory::NETWORK_FETCH ||
                                d.category == policy::ActionCategory::NETWORK_SEND;
    return host_semantics ? host_match(d.resource, inferred.resource)
                          : glob_match(d.resource, inferred.resource);
  });
}

bool dangerous_category(policy::ActionCategory c) {
  return c == policy::ActionCategory::EXECUTE || c == policy::ActionCategory::NETWORK_SEND ||
         c == policy::ActionCategory::DELETE;
}

}  // namespace

AuditVerdict admit(const SkillPackage& package, const policy::SensitivePathList& sensitive,
                   const Lexicon& lexicon, AdmissionLedger& ledger, const Clock& clock) {
  AuditVerdict verdict;
  verdict.findings = audit_description(package.manifest.description, lexicon);

  auto script = audit_script(package.script_source, package.manifest, sensitive, lexicon);
  if (!script.ok()) {
    verdict.disposition = AuditDisposition::REJECT;
    verdict.findings.push_back(
        {"aud.script_error", Severity::CRITICAL, "script", script.error().message});
    return verdict;
  }
  for (auto& f : script.value().findings) verdict.findings.push_back(std::move(f));

  for (const auto& claim : script.value().inferred) {
    if (claim_covered(claim, package.manifest.declared_capabilities)) continue;
    verdict.undeclared_capabilities.push_back(claim);
    const bool dangerous = dangerous_category(claim.category);
    verdict.findings.push_back(
        {dangerous ? "aud.undeclared_dangerous" : "aud.undeclared",
         dangerous ? Severity::CRITICAL : Severity::HIGH, "script",
         "undeclared capability " + std::string(policy::category_name(claim.category)) + ":" +
             claim.resource});
  }

  const bool has_critical =
      std::any_of(verdict.findings.begin(), verdict.findings.end(),
                  [](const Finding& f) { return f.severity == Severity::CRITICAL; });
  if (has_critical) {
    verdict.disposition = AuditDisposition::REJECT;
    return verdict;
  }
  verdict.disposition = verdict.findings.empty() ? AuditDisposition::ADMIT
                                                 : AuditDisposition::ADMIT_WITH_FLAGS;
  const auto recorded = ledger.record_admit(package.manifest.name, package.manifest.version,
                                            package.computed_digest, clock);
  if (!recorded.ok()) {
    verdict.disposition = AuditDisposition::REJECT;
    verdict.findings.push_back(
        {"aud.digest_conflict", Severity::CRITICAL, "ledger", recorded.error().message});
  }
  return verdict;
}

}  // namespace clawguard::audit
