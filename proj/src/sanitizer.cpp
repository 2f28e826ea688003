#include "clawguard/sanitizer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace clawguard::sanitizer {
namespace {

bool iequal(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::size_t ifind(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty()) return from;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (iequal(hay.substr(i, needle.size()), needle)) return i;
  }
  return std::string_view::npos;
}

// Zero-width code points used for text smuggling, as UTF-8 byte sequences.
const std::vector<std::string>& zero_width_sequences() {
  static const std::vector<std::string> seqs = {
      "\xe2\x80\x8b",  // U+200B zero width space
      "\xe2\x80\x8c",  // U+200C zero width non-joiner
      "\xe2\x80\x8d",  // U+200D zero width joiner
      "\xe2\x81\xa0",  // U+2060 word joiner
      "\xef\xbb\xbf",  // U+FEFF
  };
  return seqs;
}

std::size_t zero_width_at(std::string_view s, std::size_t i) {
  for (const auto& z : zero_width_sequences()) {
    if (s.substr(i, z.size()) == z) return z.size();
  }
  return 0;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool in_ws = true;  // trims leading whitespace
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string decode_entities(std::string_view s) {
  static const std::pair<std::string_view, char> table[] = {
      {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&#39;", '\''},
  };
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    bool matched = false;
    if (s[i] == '&') {
      for (const auto& [ent, ch] : table) {
        if (s.substr(i, ent.size()) == ent) {
          out.push_back(ch);
          i += ent.size();
          matched = true;
          break;
        }
      }
      if (!matched && s.substr(i, 6) == "&nbsp;") {
        out.push_back(' ');
        i += 6;
        matched = true;
      }
    }
    if (!matched) out.push_back(s[i++]);
  }
  return out;
}

struct Attribute {
  std::string name;
  std::string value;
};

struct ParsedTag {
  std::string name;
  bool closing = false;
  bool self_closing = false;
  std::vector<Attribute> attrs;
  std::size_t end = 0;  // index just past '>'
  bool terminated = true;
};

ParsedTag parse_tag(std::string_view s, std::size_t start) {
  // start points at '<'
  ParsedTag tag;
  std::size_t i = start + 1;
  if (i < s.size() && s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' ||
                          s[i] == '_' || s[i] == ':')) {
    tag.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
    ++i;
  }
  // attributes
  while (i < s.size() && s[i] != '>') {
    if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '>') {
      tag.self_closing = true;
      i += 2;
      tag.end = i;
      return tag;
    }
    if (std::isspace(static_cast<unsigned char>(s[i]))) {
      ++i;
      continue;
    }
    Attribute attr;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '=' &&
           s[i] != '>' && s[i] != '/') {
      attr.name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
      ++i;
    }
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i < s.size() && s[i] == '=') {
      ++i;
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
        const char quote = s[i++];
        while (i < s.size() && s[i] != quote) attr.value.push_back(s[i++]);
        if (i < s.size()) ++i;  // closing quote
      } else {
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '>') {
          attr.value.push_back(s[i++]);
        }
      }
    }
    if (!attr.name.empty()) tag.attrs.push_back(std::move(attr));
  }
  if (i < s.size() && s[i] == '>') {
    tag.end = i + 1;
  } else {
    tag.end = s.size();
    tag.terminated = false;
  }
  return tag;
}

bool style_hides(std::string_view style) {
  static const std::regex re(R"(display\s*:\s*none)", std::regex::icase);
  return std::regex_search(style.begin(), style.end(), re);
}

std::optional<HiddenChannel> hiding_channel(const ParsedTag& tag) {
  for (const auto& a : tag.attrs) {
    if (a.name == "hidden") return HiddenChannel::HIDDEN_ATTR;
    if (a.name == "aria-hidden" && iequal(a.value, "true")) return HiddenChannel::HIDDEN_ATTR;
    if (a.name == "style" && style_hides(a.value)) return HiddenChannel::DISPLAY_NONE;
  }
  return std::nullopt;
}

bool is_void_element(std::string_view name) {
  static const char* kVoid[] = {"br",    "img",  "hr",    "input", "meta",
                                "link",  "area", "base",  "col",   "embed",
                                "param", "source", "track", "wbr"};
  return std::any_of(std::begin(kVoid), std::end(kVoid),
                     [&](const char* v) { return name == v; });
}

struct SegmentCollector {
  std::vector<std::string> visible;
  std::vector<HiddenSegment> hidden;
  std::string buffer;
  std::optional<HiddenChannel> buffer_channel;  // nullopt = visible
  bool break_pending = false;

  void flush() {
    const std::string text = collapse_whitespace(decode_entities(buffer));
    buffer.clear();
    if (text.empty()) return;
    if (buffer_channel) {
      hidden.push_back({strip_zero_width(text), *buffer_channel});
    } else {
      split_zero_width(text);
    }
  }

  // Tags separate words even when no whitespace surrounds them.
  void tag_break() { break_pending = true; }

  void append(std::string_view text, std::optional<HiddenChannel> channel) {
    if (channel != buffer_channel) {
      flush();
      buffer_channel = channel;
    }
    if (break_pending && !buffer.empty()) buffer.push_back(' ');
    break_pending = false;
    buffer += text;
  }

  static std::size_t utf8_char_len(std::string_view s, std::size_t i) {
    const auto b = static_cast<unsigned char>(s[i]);
    if (b < 0x80) return 1;
    if ((b >> 5) == 0x6) return 2;
    if ((b >> 4) == 0xe) return 3;
    if ((b >> 3) == 0x1e) return 4;
    return 1;
  }

  static std::string strip_zero_width(std::string_view s) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
      const std::size_t z = zero_width_at(s, i);
      if (z > 0) {
        i += z;
      } else {
        out.push_back(s[i++]);
      }
    }
    return out;
  }

  // Characters interleaved with zero-width code points are visually hidden;
  // runs of >= 4 such characters go to the ZERO_WIDTH channel. Isolated
  // zero-width characters are dropped.
  void split_zero_width(std::string_view text) {
    std::string visible_out;
    std::string smuggled;       // current interleaved run
    std::size_t smuggled_chars = 0;
    bool pending_zw = false;    // a zero-width char separated the last two chars
    auto commit_run = [&] {
      if (smuggled.empty()) return;
      if (smuggled_chars >= 4) {
        hidden.push_back({smuggled, HiddenChannel::ZERO_WIDTH});
      } else {
        visible_out += smuggled;
      }
      smuggled.clear();
      smuggled_chars = 0;
    };
    std::size_t i = 0;
    while (i < text.size()) {
      const std::size_t z = zero_width_at(text, i);
      if (z > 0) {
        pending_zw = true;
        i += z;
        continue;
      }
      const std::size_t n = utf8_char_len(text, i);
      if (pending_zw) {
        if (smuggled.empty() && !visible_out.empty()) {
          // the char before the zero-width gap starts the run
          std::size_t cut = visible_out.size();
          while (cut > 0 && (static_cast<unsigned char>(visible_out[cut - 1]) >> 6) == 0x2) --cut;
          if (cut > 0) --cut;
          smuggled = visible_out.substr(cut);
          smuggled_chars = 1;
          visible_out.resize(cut);
        }
        smuggled += text.substr(i, n);
        ++smuggled_chars;
      } else {
        commit_run();
        visible_out += text.substr(i, n);
      }
      pending_zw = false;
      i += n;
    }
    commit_run();
    const std::string trimmed = collapse_whitespace(visible_out);
    if (!trimmed.empty()) visible.push_back(trimmed);
  }
};

struct ParseOutput {
  std::vector<std::string> visible;
  std::vector<HiddenSegment> hidden;
  std::vector<InjectionFinding> parser_findings;
  bool saw_tag = false;
};

ParseOutput parse_html(std::string_view content) {
  ParseOutput out;
  SegmentCollector col;

  struct OpenElement {
    std::string tag;
    std::optional<HiddenChannel> channel;
  };
  std::vector<OpenElement> stack;

  auto active_channel = [&]() -> std::optional<HiddenChannel> {
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
      if (it->channel) return it->channel;
    }
    return std::nullopt;
  };

  std::size_t i = 0;
  while (i < content.size()) {
    if (content[i] != '<') {
      const std::size_t next = content.find('<', i);
      const std::size_t end = next == std::string_view::npos ? content.size() : next;
      col.append(content.substr(i, end - i), active_channel());
      i = end;
      continue;
    }
    if (content.substr(i, 4) == "<!--") {
      out.saw_tag = true;
      const std::size_t close = content.find("-->", i + 4);
      const std::size_t end = close == std::string_view::npos ? content.size() : close;
      const std::string text = collapse_whitespace(decode_entities(content.substr(i + 4, end - (i + 4))));
      if (!text.empty()) {
        col.hidden.push_back({SegmentCollector::strip_zero_width(text), HiddenChannel::COMMENT});
      }
      i = close == std::string_view::npos ? content.size() : close + 3;
      continue;
    }
    const bool tag_start =
        i + 1 < content.size() &&
        (std::isalpha(static_cast<unsigned char>(content[i + 1])) || content[i + 1] == '/' ||
         content[i + 1] == '!');
    if (!tag_start) {
      col.append(content.substr(i, 1), active_channel());
      ++i;
      continue;
    }
    ParsedTag tag = parse_tag(content, i);
    out.saw_tag = true;
    col.tag_break();
    if (!tag.terminated) {
      InjectionFinding f;
      f.rule_id = "media.unparsed";
      f.severity = Severity::MED;
      f.message = "unterminated markup treated as text";
      out.parser_findings.push_back(std::move(f));
      col.append(content.substr(i), active_channel());
      break;
    }
    i = tag.end;
    if (tag.closing) {
      // text attribution tracks buffer_channel; popping needs no flush
      for (std::size_t d = stack.size(); d > 0; --d) {
        if (stack[d - 1].tag == tag.name) {
          stack.resize(d - 1);
          break;
        }
      }
      continue;
    }
    if (tag.name == "script" || tag.name == "style") {
      const std::string close_tag = "</" + tag.name;
      const std::size_t body_end = ifind(content, close_tag, i);
      const std::size_t end = body_end == std::string_view::npos ? content.size() : body_end;
      const std::string body = collapse_whitespace(content.substr(i, end - i));
      if (!body.empty()) {
        col.hidden.push_back({body, HiddenChannel::SCRIPT_BODY});
      }
      if (body_end == std::string_view::npos) {
        i = content.size();
      } else {
        const ParsedTag close = parse_tag(content, body_end);
        i = close.end;
      }
      continue;
    }
    if (tag.name == "input") {
      // hidden input values are a classic smuggling channel
      bool is_hidden_input = false;
      std::string value;
      for (const auto& a : tag.attrs) {
        if (a.name == "type" && iequal(a.value, "hidden")) is_hidden_input = true;
        if (a.name == "value") value = a.value;
      }
      if (is_hidden_input && !collapse_whitespace(value).empty()) {
        col.hidden.push_back({collapse_whitespace(decode_entities(value)), HiddenChannel::HIDDEN_ATTR});
      }
    }
    if (tag.self_closing || is_void_element(tag.name)) continue;
    stack.push_back({tag.name, hiding_channel(tag)});
  }
  col.flush();
  out.visible = std::move(col.visible);
  out.hidden = std::move(col.hidden);
  return out;
}

ParseOutput parse_plain(std::string_view content) {
  ParseOutput out;
  SegmentCollector col;
  col.append(content, std::nullopt);
  col.flush();
  out.visible = std::move(col.visible);
  out.hidden = std::move(col.hidden);
  static const std::regex tagish(R"(<[A-Za-z!/])");
  out.saw_tag = std::regex_search(content.begin(), content.end(), tagish);
  return out;
}

// ---- rule evaluation -------------------------------------------------------

struct Token {
  std::string text;  // lowercased
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (std::isalnum(static_cast<unsigned char>(s[i]))) {
      Token t;
      t.begin = i;
      while (i < s.size() && std::isalnum(static_cast<unsigned char>(s[i]))) {
        t.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
        ++i;
      }
      t.end = i;
      out.push_back(std::move(t));
    } else {
      ++i;
    }
  }
  return out;
}

struct TargetHit {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<TargetHit> find_regex_hits(const std::string& text, const std::regex& re) {
  std::vector<TargetHit> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it) {
    out.push_back({static_cast<std::size_t>(it->position()),
                   static_cast<std::size_t>(it->position() + it->length())});
  }
  return out;
}

const std::regex& url_regex() {
  static const std::regex re(
      R"((https?://[^\s"'<>)]+)|(\bwww\.[A-Za-z0-9][A-Za-z0-9.-]*)|(\b[A-Za-z0-9][A-Za-z0-9-]*(\.[A-Za-z0-9-]+)*\.(com|org|net|io|example)\b(/[^\s"'<>)]*)?))",
      std::regex::icase);
  return re;
}

const std::regex& path_regex() {
  static const std::regex re(R"((~/|\.{1,2}/|/)[A-Za-z0-9_.][A-Za-z0-9_.~/-]*)");
  return re;
}

const std::regex& tool_regex() {
  static const std::regex re(R"(\b[a-z][a-z0-9_]+\.[a-z][a-z0-9_]+\b)");
  return re;
}

// Token ordinal of the first token whose span overlaps [begin, end).
std::optional<std::size_t> token_ordinal(const std::vector<Token>& tokens, std::size_t begin,
                                         std::size_t end) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].end > begin && tokens[i].begin < end) return i;
  }
  return std::nullopt;
}

void apply_imperative(const LexiconRule& rule, const std::string& text, std::size_t segment,
                      std::vector<InjectionFinding>& out) {
  const auto tokens = tokenize(text);
  if (tokens.empty()) return;

  std::vector<TargetHit> targets;
  for (const auto& t : rule.targets) {
    std::vector<TargetHit> hits;
    if (t == "url") {
      hits = find_regex_hits(text, url_regex());
    } else if (t == "path") {
      hits = find_regex_hits(text, path_regex());
      // very short slash fragments ("/or") are prose, not paths
      std::erase_if(hits, [](const TargetHit& h) { return h.end - h.begin < 4; });
    } else if (t == "tool") {
      hits = find_regex_hits(text, tool_regex());
    }
    targets.insert(targets.end(), hits.begin(), hits.end());
  }
  if (targets.empty()) return;

  for (std::size_t vi = 0; vi < tokens.size(); ++vi) {
    const bool is_verb =
        std::any_of(rule.verbs.begin(), rule.verbs.end(),
                    [&](const std::string& v) { return tokens[vi].text == v; });
    if (!is_verb) continue;
    for (const auto& target : targets) {
      if (tokens[vi].begin >= target.begin && tokens[vi].end <= target.end) continue;
      const auto to = token_ordinal(tokens, target.begin, target.end);
      if (!to) continue;
      const auto distance = vi > *to ? vi - *to : *to - vi;
      if (distance <= static_cast<std::size_t>(rule.window)) {
        InjectionFinding f;
        f.rule_id = rule.id;
        f.kind = rule.kind;
        f.severity = rule.severity;
        f.span = {false, segment, std::min(tokens[vi].begin, target.begin),
                  std::max(tokens[vi].end, target.end)};
        f.message = "imperative '" + tokens[vi].text + "' near actionable target";
        out.push_back(std::move(f));
        break;  // one finding per verb occurrence
      }
    }
  }
}

void apply_regex_rule(const LexiconRule& rule, const std::regex& re, const std::string& text,
                      std::size_t segment, std::vector<InjectionFinding>& out) {
  for (const auto& hit : find_regex_hits(text, re)) {
    InjectionFinding f;
    f.rule_id = rule.id;
    f.kind = rule.kind;
    f.severity = rule.severity;
    f.span = {false, segment, hit.begin, hit.end};
    f.message = rule.kind == RuleKind::TRIGGER_ACTION ? "trigger-action template"
                                                      : "suspicious phrase";
    out.push_back(std::move(f));
  }
}

void apply_blob_rule(const LexiconRule& rule, const std::string& text, std::size_t segment,
                     std::vector<InjectionFinding>& out) {
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  auto is_b64 = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '/' || c == '=';
  };
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && is_b64(text[i])) {
      if (run_len == 0) run_start = i;
      ++run_len;
    } else {
      if (run_len >= static_cast<std::size_t>(rule.min_run)) {
        InjectionFinding f;
        f.rule_id = rule.id;
        f.kind = rule.kind;
        f.severity = rule.severity;
        f.span = {false, segment, run_start, run_start + run_len};
        f.message = "encoded blob run of length " + std::to_string(run_len);
        out.push_back(std::move(f));
      }
      run_len = 0;
    }
  }
}

}  // namespace

std::string SanitizedDocument::joined_visible() const {
  std::string out;
  for (std::size_t i = 0; i < visible_segments.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += visible_segments[i];
  }
  return out;
}

bool SanitizedDocument::has_severity_at_least(Severity s) const {
  return std::any_of(findings.begin(), findings.end(),
                     [s](const InjectionFinding& f) { return f.severity >= s; });
}

std::vector<InjectionFinding> detect_injection(const Lexicon& lexicon,
                                               const std::vector<std::string>& segments,
                                               std::string_view rule_prefix) {
  std::vector<InjectionFinding> out;
  for (const auto& rule : lexicon.rules) {
    if (rule.id.substr(0, rule_prefix.size()) != rule_prefix) continue;
    std::optional<std::regex> re;
    if ((rule.kind == RuleKind::PHRASE || rule.kind == RuleKind::TRIGGER_ACTION) &&
        !rule.pattern.empty()) {
      re.emplace(rule.pattern, std::regex::icase);
    }
    for (std::size_t seg = 0; seg < segments.size(); ++seg) {
      switch (rule.kind) {
        case RuleKind::PHRASE:
        case RuleKind::TRIGGER_ACTION:
          if (re) apply_regex_rule(rule, *re, segments[seg], seg, out);
          break;
        case RuleKind::IMPERATIVE:
          apply_imperative(rule, segments[seg], seg, out);
          break;
        case RuleKind::ENCODED_BLOB:
          apply_blob_rule(rule, segments[seg], seg, out);
          break;
      }
    }
  }
  return out;
}

TaintLabel assign_taint(Provenance origin, std::optional<Sensitivity> declared_sensitivity) {
  TaintLabel t;
  t.provenance = origin;
  if (declared_sensitivity) {
    t.sensitivity = *declared_sensitivity;
  } else {
    t.sensitivity = origin == Provenance::UNTRUSTED_EXTERNAL ? Sensitivity::PUBLIC
                                                             : Sensitivity::INTERNAL;
  }
  return t;
}

bool valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b = static_cast<unsigned char>(bytes[i]);
    std::size_t extra = 0;
    if (b < 0x80) {
      extra = 0;
    } else if ((b >> 5) == 0x6) {
      extra = 1;
    } else if ((b >> 4) == 0xe) {
      extra = 2;
    } else if ((b >> 3) == 0x1e) {
      extra = 3;
    } else {
      return false;
    }
    if (i + extra >= bytes.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(bytes[i + k]) >> 6) != 0x2) return false;
    }
    i += extra + 1;
  }
  return true;
}

Result<SanitizedDocument> sanitize(const RawInput& input, const Lexicon& lexicon) {
  if (!valid_utf8(input.content)) {
    return Result<SanitizedDocument>::failure("DECODE_ERROR", "content is not valid UTF-8");
  }

  ParseOutput parsed;
  std::vector<InjectionFinding> findings;
  switch (input.media_kind) {
    case MediaKind::HTML: {
      parsed = parse_html(input.content);
      if (!parsed.saw_tag) {
        InjectionFinding f;
        f.rule_id = "media.mismatch";
        f.severity = Severity::MED;
        f.message = "declared HTML but no markup found";
        findings.push_back(std::move(f));
      }
      break;
    }
    case MediaKind::MARKDOWN:
      // markdown may embed HTML constructs; the tolerant parser handles both
      parsed = parse_html(input.content);
      break;
    case MediaKind::PLAIN: {
      parsed = parse_plain(input.content);
      if (parsed.saw_tag) {
        InjectionFinding f;
        f.rule_id = "media.mismatch";
        f.severity = Severity::MED;
        f.message = "declared PLAIN but content contains markup";
        findings.push_back(std::move(f));
      }
      break;
    }
  }
  for (auto& f : parsed.parser_findings) findings.push_back(std::move(f));

  SanitizedDocument doc;
  doc.visible_segments = std::move(parsed.visible);
  doc.hidden_segments = std::move(parsed.hidden);
  doc.taint = TaintLabel{input.origin, Sensitivity::PUBLIC};

  for (auto& f : detect_injection(lexicon, doc.visible_segments)) {
    findings.push_back(std::move(f));
  }
  std::vector<std::string> hidden_texts;
  hidden_texts.reserve(doc.hidden_segments.size());
  for (const auto& h : doc.hidden_segments) hidden_texts.push_back(h.text);
  for (auto& f : detect_injection(lexicon, hidden_texts)) {
    f.span.hidden = true;
    f.severity = escalate(f.severity);
    findings.push_back(std::move(f));
  }

  doc.findings = std::move(findings);
  return doc;
}

std::string_view hidden_channel_name(HiddenChannel c) {
  switch (c) {
    case HiddenChannel::COMMENT: return "COMMENT";
    case HiddenChannel::DISPLAY_NONE: return "DISPLAY_NONE";
    case HiddenChannel::HIDDEN_ATTR: return "HIDDEN_ATTR";
    case HiddenChannel::ZERO_WIDTH: return "ZERO_WIDTH";
    case HiddenChannel::SCRIPT_BODY: return "SCRIPT_BODY";
  }
  return "UNKNOWN";
}

std::string_view media_kind_name(MediaKind m) {
  switch (m) {
    case MediaKind::HTML: return "HTML";
    case MediaKind::PLAIN: return "PLAIN";
    case MediaKind::MARKDOWN: return "MARKDOWN";
  }
  return "UNKNOWN";
}

std::optional<MediaKind> media_kind_from_name(std::string_view name) {
  for (MediaKind m : {MediaKind::HTML, MediaKind::PLAIN, MediaKind::MARKDOWN}) {
    if (media_kind_name(m) == name) return m;
  }
  return std::nullopt;
}

}  // namespace clawguard::sanitizer
