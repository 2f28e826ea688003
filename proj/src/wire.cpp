#include "clawguard/wire.hpp"

namespace clawguard::wire {

std::string_view envelope_kind_name(EnvelopeKind k) {
  switch (k) {
    case EnvelopeKind::HELLO: return "HELLO";
    case EnvelopeKind::CHALLENGE: return "CHALLENGE";
    case EnvelopeKind::PROOF: return "PROOF";
    case EnvelopeKind::ESTABLISHED: return "ESTABLISHED";
    case EnvelopeKind::TOOL_CALL: return "TOOL_CALL";
    case EnvelopeKind::TOOL_RESULT: return "TOOL_RESULT";
    case EnvelopeKind::AGENT_MSG: return "AGENT_MSG";
    case EnvelopeKind::MEMORY_WRITE: return "MEMORY_WRITE";
    case EnvelopeKind::VERDICT: return "VERDICT";
    case EnvelopeKind::ERROR: return "ERROR";
  }
  return "ERROR";
}

std::optional<EnvelopeKind> envelope_kind_from_name(std::string_view name) {
  for (EnvelopeKind k :
       {EnvelopeKind::HELLO, EnvelopeKind::CHALLENGE, EnvelopeKind::PROOF,
        EnvelopeKind::ESTABLISHED, EnvelopeKind::TOOL_CALL, EnvelopeKind::TOOL_RESULT,
        EnvelopeKind::AGENT_MSG, EnvelopeKind::MEMORY_WRITE, EnvelopeKind::VERDICT,
        EnvelopeKind::ERROR}) {
    if (envelope_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string envelope_to_json_text(const Envelope& env) {
  nlohmann::json j = {{"kind", std::string(envelope_kind_name(env.kind))},
                      {"seq", env.seq},
                      {"payload", env.payload}};
  if (!env.session_id.empty()) j["session_id"] = env.session_id;
  return j.dump();
}

Result<Envelope> envelope_from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return Result<Envelope>::failure("MALFORMED", "envelope is not a JSON object");
  }
  if (!j.contains("kind") || !j["kind"].is_string()) {
    return Result<Envelope>::failure("MALFORMED", "envelope missing kind");
  }
  const auto kind = envelope_kind_from_name(j["kind"].get<std::string>());
  if (!kind) {
    return Result<Envelope>::failure("UNKNOWN_KIND",
                                     "unknown envelope kind: " + j["kind"].get<std::string>());
  }
  Envelope env;
  env.kind = *kind;
  env.session_id = j.value("session_id", "");
  env.seq = j.value("seq", std::uint64_t{0});
  env.payload = j.value("payload", nlohmann::json::object());
  return env;
}

std::string frame(const Envelope& env) {
  const std::string body = envelope_to_json_text(env);
  const auto len = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(body.size() + 4);
  out.push_back(static_cast<char>(len >> 24));
  out.push_back(static_cast<char>((len >> 16) & 0xff));
  out.push_back(static_cast<char>((len >> 8) & 0xff));
  out.push_back(static_cast<char>(len & 0xff));
  out += body;
  return out;
}

Result<std::optional<Envelope>> try_decode(std::string& buffer) {
  if (buffer.size() < 4) return std::optional<Envelope>{};
  const auto b = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer[i]); };
  const std::uint32_t len = (std::uint32_t(b(0)) << 24) | (std::uint32_t(b(1)) << 16) |
                            (std::uint32_t(b(2)) << 8) | std::uint32_t(b(3));
  if (len > kMaxFrameBytes) {
    return Result<std::optional<Envelope>>::failure("FRAME_TOO_LARGE",
                                                    "frame length " + std::to_string(len));
  }
  if (buffer.size() < 4 + static_cast<std::size_t>(len)) return std::optional<Envelope>{};
  const std::string body = buffer.substr(4, len);
  buffer.erase(0, 4 + static_cast<std::size_t>(len));
  auto env = envelope_from_json_text(body);
  if (!env.ok()) {
    return Result<std::optional<Envelope>>::failure(env.error().code, env.error().message);
  }
  return std::optional<Envelope>{env.take()};
}

}  // namespace clawguard::wire
