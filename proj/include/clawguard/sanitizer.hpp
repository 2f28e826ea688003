#pragma once

#include <optional>
#include <string>
#include <vector>

#include "clawguard/common.hpp"
#include "clawguard/lexicon.hpp"
#include "clawguard/taint.hpp"
#include "clawguard/verdict.hpp"

namespace clawguard::sanitizer {

enum class MediaKind { HTML, PLAIN, MARKDOWN };

enum class HiddenChannel { COMMENT, DISPLAY_NONE, HIDDEN_ATTR, ZERO_WIDTH, SCRIPT_BODY };

struct RawInput {
  std::string content;
  MediaKind media_kind = MediaKind::PLAIN;
  Provenance origin = Provenance::UNTRUSTED_EXTERNAL;
  std::string source_locator;
};

struct TextSpan {
  bool hidden = false;   // which segment list the index addresses
  std::size_t segment = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct InjectionFinding {
  std::string rule_id;
  RuleKind kind = RuleKind::PHRASE;
  TextSpan span;
  Severity severity = Severity::MED;
  std::string message;
};

struct HiddenSegment {
  std::string text;
  HiddenChannel channel = HiddenChannel::COMMENT;
};

struct SanitizedDocument {
  std::vector<std::string> visible_segments;
  std::vector<HiddenSegment> hidden_segments;
  std::vector<InjectionFinding> findings;
  TaintLabel taint;

  std::string joined_visible() const;
  bool has_severity_at_least(Severity s) const;
};

// Strip markup, split hidden channels out, label taint, run the rule
// lexicon over every segment. Hidden-channel hits are escalated one
// severity level. Fails only on invalid UTF-8 (DECODE_ERROR).
Result<SanitizedDocument> sanitize(const RawInput& input, const Lexicon& lexicon);

// Applies rules whose id starts with `rule_prefix` to markup-free segments.
// Pure function of the text. Default prefix selects the injection rules.
std::vector<InjectionFinding> detect_injection(const Lexicon& lexicon,
                                               const std::vector<std::string>& segments,
                                               std::string_view rule_prefix = "inj.");

TaintLabel assign_taint(Provenance origin,
                        std::optional<Sensitivity> declared_sensitivity = std::nullopt);

std::string_view hidden_channel_name(HiddenChannel c);
std::string_view media_kind_name(MediaKind m);
std::optional<MediaKind> media_kind_from_name(std::string_view name);

bool valid_utf8(std::string_view bytes);

}  // namespace clawguard::sanitizer
