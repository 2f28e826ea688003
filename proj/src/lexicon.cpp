#include "clawguard/lexicon.hpp"

#include <fstream>
#include <sstream>

namespace clawguard {

const LexiconRule* Lexicon::find(std::string_view rule_id) const {
  for (const auto& r : rules) {
    if (r.id == rule_id) return &r;
  }
  return nullptr;
}

std::string_view rule_kind_name(RuleKind k) {
  switch (k) {
    case RuleKind::PHRASE: return "phrase";
    case RuleKind::IMPERATIVE: return "imperative";
    case RuleKind::TRIGGER_ACTION: return "trigger_action";
    case RuleKind::ENCODED_BLOB: return "encoded_blob";
  }
  return "phrase";
}

namespace {

std::optional<RuleKind> rule_kind_from_name(std::string_view name) {
  for (RuleKind k : {RuleKind::PHRASE, RuleKind::IMPERATIVE, RuleKind::TRIGGER_ACTION,
                     RuleKind::ENCODED_BLOB}) {
    if (rule_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

LexiconRule phrase(std::string id, Severity sev, std::string pattern) {
  LexiconRule r;
  r.id = std::move(id);
  r.kind = RuleKind::PHRASE;
  r.severity = sev;
  r.pattern = std::move(pattern);
  return r;
}

LexiconRule imperative(std::string id, Severity sev, std::vector<std::string> verbs,
                       std::vector<std::string> targets) {
  LexiconRule r;
  r.id = std::move(id);
  r.kind = RuleKind::IMPERATIVE;
  r.severity = sev;
  r.verbs = std::move(verbs);
  r.targets = std::move(targets);
  return r;
}

}  // namespace

Lexicon default_lexicon() {
  Lexicon lex;
  lex.version = 1;

  lex.rules.push_back(phrase(
      "inj.override_phrase", Severity::HIGH,
      R"((ignore|disregard|forget)\s+(all\s+|any\s+)?(previous|prior|earlier|above|your|the|these)?\s*(instructions?|rules?|constraints?)|new\s+system\s+prompt|override\s+(all\s+)?(safety|security)\s+(rules?|checks?))"));

  lex.rules.push_back(imperative("inj.exfil_instruction", Severity::HIGH,
                                 {"upload", "send", "post", "forward", "exfiltrate", "email"},
                                 {"url", "path"}));
  lex.rules.push_back(imperative("inj.exec_instruction", Severity::HIGH,
                                 {"execute", "run", "install", "launch"},
                                 {"url", "path", "tool"}));
  lex.rules.push_back(imperative("inj.destructive_instruction", Severity::HIGH,
                                 {"delete", "remove", "wipe"}, {"path", "tool"}));
  lex.rules.push_back(
      imperative("inj.probe_instruction", Severity::MED, {"read", "open"}, {"path"}));

  LexiconRule trig;
  trig.id = "inj.trigger_action";
  trig.kind = RuleKind::TRIGGER_ACTION;
  trig.severity = Severity::HIGH;
  trig.pattern =
      R"(\b(whenever|when|if|each\s+time|every\s+time)\b[\s\S]{0,120}?\b(encounter(ing|s)?|see(ing|s)?|visit(ing|s)?|receiv(e|es|ing)|find(ing|s)?|open(ing|s)?|brows(e|es|ing))\b[\s\S]{0,160}?\b(execute|run|send|post|upload|delete|call|install|download|launch)\b)";
  lex.rules.push_back(std::move(trig));

  LexiconRule blob;
  blob.id = "inj.encoded_blob";
  blob.kind = RuleKind::ENCODED_BLOB;
  blob.severity = Severity::MED;
  blob.min_run = 64;
  lex.rules.push_back(std::move(blob));

  // Auditor-only rules (applied to skill descriptions, not page content).
  lex.rules.push_back(phrase(
      "aud.desc_inducement", Severity::CRITICAL,
      R"((before|prior\s+to)\s+(any|every|each)\s+(task|request|action|use)[\s\S]{0,80}?(run|execute|call|fetch|download|install)|you\s+must\s+always[\s\S]{0,60}?(run|execute|call|send|post|upload|install)|before\s+doing\s+anything[\s\S]{0,60}?(run|execute|call))"));
  lex.rules.push_back(phrase(
      "aud.trust_claim", Severity::HIGH,
      R"(pre-?approved|already\s+(vetted|approved|trusted)|(no|without)\s+(approval|review|vetting)\s+(needed|required)|bypass(es)?\s+(security|review|sandbox))"));

  return lex;
}

Result<Lexicon> lexicon_from_json(const nlohmann::json& j) {
  Lexicon lex;
  if (!j.is_object() || !j.contains("version") || !j.contains("rules")) {
    return Result<Lexicon>::failure("MALFORMED", "lexicon requires version and rules");
  }
  lex.version = j["version"].get<int>();
  for (const auto& rj : j["rules"]) {
    LexiconRule r;
    if (!rj.contains("id") || !rj.contains("kind")) {
      return Result<Lexicon>::failure("MALFORMED", "rule requires id and kind");
    }
    r.id = rj["id"].get<std::string>();
    const auto kind = rule_kind_from_name(rj["kind"].get<std::string>());
    if (!kind) return Result<Lexicon>::failure("MALFORMED", "unknown rule kind for " + r.id);
    r.kind = *kind;
    r.severity = severity_from_name(rj.value("severity", "MED")).value_or(Severity::MED);
    r.pattern = rj.value("pattern", "");
    if (rj.contains("verbs")) r.verbs = rj["verbs"].get<std::vector<std::string>>();
    if (rj.contains("targets")) r.targets = rj["targets"].get<std::vector<std::string>>();
    r.window = rj.value("window", 12);
    r.min_run = rj.value("min_run", 64);
    lex.rules.push_back(std::move(r));
  }
  return lex;
}

nlohmann::json lexicon_to_json(const Lexicon& lex) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : lex.rules) {
    nlohmann::json rj = {{"id", r.id},
                         {"kind", std::string(rule_kind_name(r.kind))},
                         {"severity", std::string(severity_name(r.severity))}};
    if (!r.pattern.empty()) rj["pattern"] = r.pattern;
    if (!r.verbs.empty()) rj["verbs"] = r.verbs;
    if (!r.targets.empty()) rj["targets"] = r.targets;
    if (r.kind == RuleKind::IMPERATIVE) rj["window"] = r.window;
    if (r.kind == RuleKind::ENCODED_BLOB) rj["min_run"] = r.min_run;
    rules.push_back(std::move(rj));
  }
  return {{"version", lex.version}, {"rules", std::move(rules)}};
}

Result<Lexicon> load_lexicon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Result<Lexicon>::failure("IO_ERROR", "cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) return Result<Lexicon>::failure("MALFORMED", "invalid json in " + path);
  return lexicon_from_json(j);
}

Status save_lexicon_file(const Lexicon& lex, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) return Status::failure("IO_ERROR", "cannot write " + path);
  out << lexicon_to_json(lex).dump(2) << "\n";
  return Status{};
}

}  // namespace clawguard
