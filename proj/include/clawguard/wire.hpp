#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "clawguard/common.hpp"

namespace clawguard::wire {

enum class EnvelopeKind {
  HELLO,
  CHALLENGE,
  PROOF,
  ESTABLISHED,
  TOOL_CALL,
  TOOL_RESULT,
  AGENT_MSG,
  MEMORY_WRITE,
  VERDICT,
  ERROR,
};

std::string_view envelope_kind_name(EnvelopeKind k);
std::optional<EnvelopeKind> envelope_kind_from_name(std::string_view name);

// One length-prefixed UTF-8 JSON object per message. seq is a per-session
// monotone counter; pre-session envelopes carry seq 0.
struct Envelope {
  EnvelopeKind kind = EnvelopeKind::ERROR;
  std::string session_id;
  std::uint64_t seq = 0;
  nlohmann::json payload = nlohmann::json::object();
};

std::string envelope_to_json_text(const Envelope& env);
// Unknown kinds are rejected, never silently dropped.
Result<Envelope> envelope_from_json_text(const std::string& text);

inline constexpr std::size_t kMaxFrameBytes = 16 * 1024 * 1024;

// 4-byte big-endian length prefix + JSON text.
std::string frame(const Envelope& env);

// Pops one complete frame off the front of `buffer` if present.
// FRAME_TOO_LARGE and MALFORMED are fatal to the stream.
Result<std::optional<Envelope>> try_decode(std::string& buffer);

}  // namespace clawguard::wire
