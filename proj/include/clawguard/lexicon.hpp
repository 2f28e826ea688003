#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "clawguard/common.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard {

// Rule classes the detector understands. PHRASE and TRIGGER_ACTION are
// regex-driven; IMPERATIVE is a verb/target token-proximity check;
// ENCODED_BLOB matches long base64-alphabet runs.
enum class RuleKind { PHRASE, IMPERATIVE, TRIGGER_ACTION, ENCODED_BLOB };

struct LexiconRule {
  std::string id;
  RuleKind kind = RuleKind::PHRASE;
  Severity severity = Severity::MED;
  std::string pattern;                // PHRASE / TRIGGER_ACTION regex (case-insensitive)
  std::vector<std::string> verbs;     // IMPERATIVE
  std::vector<std::string> targets;   // IMPERATIVE: any of "url", "path", "tool"
  int window = 12;                    // IMPERATIVE: token distance
  int min_run = 64;                   // ENCODED_BLOB: minimum run length
};

struct Lexicon {
  int version = 0;
  std::vector<LexiconRule> rules;

  const LexiconRule* find(std::string_view rule_id) const;
};

// Built-in rule set; data/lexicon.json ships the same content.
Lexicon default_lexicon();

Result<Lexicon> lexicon_from_json(const nlohmann::json& j);
nlohmann::json lexicon_to_json(const Lexicon& lex);
Result<Lexicon> load_lexicon_file(const std::string& path);
Status save_lexicon_file(const Lexicon& lex, const std::string& path);

std::string_view rule_kind_name(RuleKind k);

}  // namespace clawguard
