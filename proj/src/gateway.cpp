#include "clawguard/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "clawguard/digest.hpp"
#include "clawguard/paths.hpp"
#include "clawguard/sanitizer.hpp"

namespace clawguard::gateway {

std::string_view channel_origin_name(ChannelOrigin o) {
  switch (o) {
    case ChannelOrigin::LOOPBACK: return "LOOPBACK";
    case ChannelOrigin::LAN: return "LAN";
    case ChannelOrigin::REMOTE: return "REMOTE";
    case ChannelOrigin::INTER_AGENT: return "INTER_AGENT";
  }
  return "REMOTE";
}

Status validate_config(const GatewayConfig& config) {
  if (config.gateway_fingerprint.size() != 32) {
    return Status::failure("BAD_CONFIG", "gateway_fingerprint must be 32 bytes");
  }
  for (const auto& token : config.pairing_tokens) {
    if (token.secret.size() != 32) {
      return Status::failure("BAD_CONFIG", "pairing secret must be 32 bytes: " + token.principal);
    }
  }
  const std::set<std::string> stages(config.pipeline_order.begin(),
                                     config.pipeline_order.end());
  const std::set<std::string> expected = {"policy", "correlate", "trajectory", "sandbox"};
  if (stages != expected || config.pipeline_order.size() != expected.size()) {
    return Status::failure("BAD_CONFIG", "pipeline_order must list each stage exactly once");
  }
  return Status{};
}

Result<GatewayConfig> config_from_json(const nlohmann::json& j) {
  GatewayConfig config;
  if (!j.is_object()) return Result<GatewayConfig>::failure("MALFORMED", "config not an object");
  config.listen_endpoint = j.value("listen_endpoint", config.listen_endpoint);
  const auto fp = hex_decode(j.value("gateway_fingerprint", ""));
  if (!fp) return Result<GatewayConfig>::failure("MALFORMED", "bad gateway_fingerprint hex");
  config.gateway_fingerprint = *fp;
  if (j.contains("pairing_tokens")) {
    for (const auto& t : j["pairing_tokens"]) {
      PairingToken token;
      token.principal = t.value("principal", "");
      const auto secret = hex_decode(t.value("secret", ""));
      if (token.principal.empty() || !secret) {
        return Result<GatewayConfig>::failure("MALFORMED", "bad pairing token");
      }
      token.secret = *secret;
      token.profile = t.value("profile", "");
      config.pairing_tokens.push_back(std::move(token));
    }
  }
  config.loopback_exempt = j.value("loopback_exempt", false);
  if (j.contains("pipeline_order")) {
    config.pipeline_order = j["pipeline_order"].get<std::vector<std::string>>();
  }
  config.home = j.value("home", config.home);
  config.default_profile = j.value("default_profile", config.default_profile);
  const auto valid = validate_config(config);
  if (!valid.ok()) {
    return Result<GatewayConfig>::failure(valid.error().code, valid.error().message);
  }
  return config;
}

nlohmann::json config_to_json(const GatewayConfig& config) {
  nlohmann::json principals = nlohmann::json::array();
  for (const auto& t : config.pairing_tokens) {
    principals.push_back({{"principal", t.principal}, {"profile", t.profile}});
  }
  nlohmann::json j = {{"listen_endpoint", config.listen_endpoint},
                      {"gateway_fingerprint", hex_encode(config.gateway_fingerprint)},
                      {"principals", std::move(principals)},
                      {"pipeline_order", config.pipeline_order},
                      {"home", config.home},
                      {"default_profile", config.default_profile}};
  if (config.loopback_exempt) j["loopback_exempt"] = true;
  return j;
}

Result<GatewayConfig> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return Result<GatewayConfig>::failure("IO_ERROR", "cannot open " + path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) return Result<GatewayConfig>::failure("MALFORMED", "invalid json");
  return config_from_json(j);
}

Gateway::Gateway(GatewayConfig config, GatewayDeps deps, std::uint64_t rng_seed, Clock clock)
    : config_(std::move(config)),
      deps_(std::move(deps)),
      intent_classifier_(
          std::make_unique<trajectory::LexiconIntentClassifier>(deps_.verb_lexicon)),
      clock_(std::move(clock)),
      rng_(rng_seed) {}

void Gateway::put_profile(policy::CapabilityProfile profile) {
  std::lock_guard lock(mutex_);
  profiles_.put(std::move(profile));
}

const policy::CapabilityProfile* Gateway::profile(const std::string& profile_id) const {
  std::lock_guard lock(mutex_);
  return profiles_.current(profile_id);
}

Result<int> Gateway::pin(const std::string& profile_id, policy::PinnedConstraint constraint,
                         Provenance actor) {
  std::lock_guard lock(mutex_);
  const auto* current = profiles_.current(profile_id);
  if (current == nullptr) return Result<int>::failure("UNKNOWN_PROFILE", profile_id);
  auto next = policy::pin_constraint(*current, std::move(constraint), actor);
  if (!next.ok()) return Result<int>::failure(next.error().code, next.error().message);
  const int version = next.value().version;
  governance_.append("pin", {{"profile", profile_id}, {"version", version}});
  profiles_.put(next.take());
  return version;
}

wire::Envelope Gateway::error_envelope(const std::string& code, const std::string& message,
                                       const wire::Envelope& cause) const {
  wire::Envelope out;
  out.kind = wire::EnvelopeKind::ERROR;
  out.session_id = cause.session_id;
  out.seq = cause.seq;
  out.payload = {{"code", code}, {"message", message}};
  return out;
}

std::string Gateway::fresh_hex(std::size_t bytes) {
  std::vector<std::uint8_t> buf(bytes);
  for (auto& b : buf) b = static_cast<std::uint8_t>(rng_() & 0xff);
  return hex_encode(buf);
}

std::string Gateway::fresh_session_id() {
  std::string id = fresh_hex(16);
  while (sessions_.count(id) > 0) id = fresh_hex(16);
  return id;
}

const PairingToken* Gateway::token_for(const std::string& principal) const {
  for (const auto& t : config_.pairing_tokens) {
    if (t.principal == principal) return &t;
  }
  return nullptr;
}

Gateway::Session* Gateway::session_for(const std::string& session_id) {
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? nullptr : &it->second;
}

std::string Gateway::profile_id_for(const std::string& principal) const {
  const auto* token = token_for(principal);
  if (token != nullptr && !token->profile.empty()) return token->profile;
  return config_.default_profile;
}

std::vector<wire::Envelope> Gateway::handle(const wire::Envelope& env, Connection& conn) {
  std::lock_guard lock(mutex_);
  switch (env.kind) {
    case wire::EnvelopeKind::HELLO:
      return handle_hello(env, conn);
    case wire::EnvelopeKind::PROOF:
      return handle_proof(env, conn);
    case wire::EnvelopeKind::TOOL_CALL:
    case wire::EnvelopeKind::AGENT_MSG:
    case wire::EnvelopeKind::MEMORY_WRITE:
      return handle_session_envelope(env, conn);
    default:
      return {error_envelope("UNEXPECTED_KIND",
                             std::string("clients do not send ") +
                                 std::string(wire::envelope_kind_name(env.kind)),
                             env)};
  }
}

std::vector<wire::Envelope> Gateway::handle_hello(const wire::Envelope& env, Connection& conn) {
  const std::string principal = env.payload.value("principal", "");
  const std::string client_nonce = env.payload.value("client_nonce", "");
  const auto nonce_bytes = hex_decode(client_nonce);
  if (principal.empty() || !nonce_bytes || nonce_bytes->size() < 16) {
    return {error_envelope("BAD_NONCE", "client nonce must be at least 16 bytes", env)};
  }
  if (token_for(principal) == nullptr) {
    return {error_envelope("UNKNOWN_PRINCIPAL", "no pairing token for " + principal, env)};
  }
  const std::string replay_key = principal + "|" + client_nonce;
  if (used_nonces_.count(replay_key) > 0) {
    return {error_envelope("REPLAY", "client nonce reuse", env)};
  }
  used_nonces_.insert(replay_key);

  conn.pending_principal = principal;
  conn.pending_client_nonce = client_nonce;
  conn.pending_server_nonce = fresh_hex(16);

  wire::Envelope challenge;
  challenge.kind = wire::EnvelopeKind::CHALLENGE;
  challenge.seq = env.seq;
  challenge.payload = {{"server_nonce", conn.pending_server_nonce},
                       {"gateway_fingerprint", hex_encode(config_.gateway_fingerprint)}};
  return {challenge};
}

std::vector<wire::Envelope> Gateway::handle_proof(const wire::Envelope& env, Connection& conn) {
  if (conn.pending_principal.empty()) {
    return {error_envelope("PROTOCOL", "PROOF without a pending challenge", env)};
  }
  const auto* token = token_for(conn.pending_principal);
  if (token == nullptr) {
    return {error_envelope("UNKNOWN_PRINCIPAL", "token vanished", env)};
  }
  // transcript layout: client_nonce || server_nonce || gateway_fingerprint
  const auto client_nonce = hex_decode(conn.pending_client_nonce).value_or(std::vector<std::uint8_t>{});
  const auto server_nonce = hex_decode(conn.pending_server_nonce).value_or(std::vector<std::uint8_t>{});
  std::string mac_input(client_nonce.begin(), client_nonce.end());
  mac_input.append(server_nonce.begin(), server_nonce.end());
  mac_input.append(config_.gateway_fingerprint.begin(), config_.gateway_fingerprint.end());
  const std::string expected = digest_hex(hmac_sha256(token->secret, mac_input));

  const std::string presented = env.payload.value("digest", "");
  if (presented != expected) {
    conn.pending_principal.clear();
    return {error_envelope("PROOF_MISMATCH",
                           "keyed digest mismatch: wrong token or wrong gateway fingerprint",
                           env)};
  }

  Session session;
  session.descriptor.session_id = fresh_session_id();
  session.descriptor.principal = conn.pending_principal;
  session.descriptor.established_at = iso8601_utc(clock_());
  session.descriptor.channel_origin = conn.origin;
  session.descriptor.profile_ref = profile_id_for(conn.pending_principal);
  conn.session_id = session.descriptor.session_id;
  conn.pending_principal.clear();

  wire::Envelope established;
  established.kind = wire::EnvelopeKind::ESTABLISHED;
  established.session_id = session.descriptor.session_id;
  established.seq = env.seq;
  established.payload = {{"session_id", session.descriptor.session_id},
                         {"profile", session.descriptor.profile_ref}};
  sessions_[session.descriptor.session_id] = std::move(session);
  return {established};
}

std::vector<wire::Envelope> Gateway::handle_session_envelope(const wire::Envelope& env,
                                                             Connection& conn) {
  if (conn.session_id.empty()) {
    if (conn.origin == ChannelOrigin::LOOPBACK) {
      if (!config_.loopback_exempt) {
        return {error_envelope("LOOPBACK_REJECTED",
                               "loopback connections authenticate like everyone else", env)};
      }
      // CVE-class behavior, reproducible only when explicitly configured on
      Session session;
      session.descriptor.session_id = fresh_session_id();
      session.descriptor.principal = "loopback";
      session.descriptor.established_at = iso8601_utc(clock_());
      session.descriptor.channel_origin = conn.origin;
      session.descriptor.profile_ref = config_.default_profile;
      conn.session_id = session.descriptor.session_id;
      sessions_[session.descriptor.session_id] = std::move(session);
    } else {
      return {error_envelope("SESSION_UNKNOWN", "no established session", env)};
    }
  }
  Session* session = session_for(env.session_id.empty() ? conn.session_id : env.session_id);
  if (session == nullptr || session->terminated ||
      session->descriptor.session_id != conn.session_id) {
    return {error_envelope("SESSION_UNKNOWN", "no such session", env)};
  }
  if (env.seq != session->expected_seq) {
    return {error_envelope("OUT_OF_ORDER",
                           "expected seq " + std::to_string(session->expected_seq) + ", got " +
                               std::to_string(env.seq),
                           env)};
  }
  ++session->expected_seq;

  switch (env.kind) {
    case wire::EnvelopeKind::TOOL_CALL:
      return route_tool_call(env, *session);
    case wire::EnvelopeKind::AGENT_MSG:
      return route_agent_msg(env, *session);
    case wire::EnvelopeKind::MEMORY_WRITE:
      return route_memory_write(env, *session);
    default:
      return {error_envelope("UNEXPECTED_KIND", "not a session envelope", env)};
  }
}

namespace {

TaintLabel taint_from_payload(const nlohmann::json& j, TaintLabel fallback) {
  TaintLabel out = fallback;
  if (j.contains("provenance")) {
    if (const auto p = provenance_from_name(j["provenance"].get<std::string>())) {
      out.provenance = *p;
    }
  }
  if (j.contains("sensitivity")) {
    if (const auto s = sensitivity_from_name(j["sensitivity"].get<std::string>())) {
      out.sensitivity = *s;
    }
  }
  return out;
}

}  // namespace

std::vector<wire::Envelope> Gateway::route_tool_call(const wire::Envelope& env, Session& session) {
  ToolCallRequest call;
  call.tool = env.payload.value("tool", "");
  call.session_id = session.descriptor.session_id;
  call.reasoning_excerpt = env.payload.value("reasoning", "");
  call.declared_purpose = env.payload.value("purpose", "");
  const TaintLabel own_args{Provenance::USER, Sensitivity::PUBLIC};
  if (env.payload.contains("args") && env.payload["args"].is_object()) {
    for (const auto& [name, spec] : env.payload["args"].items()) {
      ArgValue arg;
      if (spec.is_object()) {
        arg.value = spec.value("value", "");
        arg.taint = taint_from_payload(spec, own_args);
      } else if (spec.is_string()) {
        arg.value = spec.get<std::string>();
        arg.taint = own_args;
      }
      // agent arguments inherit whatever already entered the session context
      arg.taint = join(arg.taint, session.context_taint);
      call.args[name] = std::move(arg);
    }
  }

  std::vector<wire::Envelope> responses;
  const Verdict verdict = evaluate_locked(call, session, &responses);

  wire::Envelope out;
  out.kind = wire::EnvelopeKind::VERDICT;
  out.session_id = session.descriptor.session_id;
  out.seq = env.seq;
  out.payload = verdict_to_json(verdict);
  out.payload["tool"] = call.tool;
  for (auto& r : responses) {
    r.session_id = session.descriptor.session_id;
    r.seq = env.seq;
  }
  responses.push_back(std::move(out));
  return responses;
}

std::vector<wire::Envelope> Gateway::route_agent_msg(const wire::Envelope& env, Session& session) {
  const std::string to_principal = env.payload.value("to", "");
  const std::string body = env.payload.value("body", "");

  Session* receiver = nullptr;
  for (auto& [_, candidate] : sessions_) {
    if (candidate.descriptor.principal == to_principal && !candidate.terminated) {
      receiver = &candidate;
    }
  }
  if (receiver == nullptr) {
    return {error_envelope("UNKNOWN_RECEIVER", "no session for principal " + to_principal, env)};
  }

  const auto* sender_profile = profiles_.current(session.descriptor.profile_ref);
  policy::CapabilityProfile empty_profile;
  empty_profile.profile_id = session.descriptor.profile_ref;
  const auto result = policy::check_a2a(body, sender_profile ? *sender_profile : empty_profile,
                                        to_principal, deps_.lexicon);

  if (result.delivered) {
    receiver->inbox.push_back({session.descriptor.principal, body, result.delivered_taint});
    receiver->context_taint = join(receiver->context_taint, result.delivered_taint);

    trajectory::AtomicAction ingest;
    ingest.seq = receiver->graph.nodes().size() + 1;
    ingest.descriptor.category = policy::ActionCategory::COMMUNICATE;
    ingest.descriptor.resource = "a2a:" + session.descriptor.principal;
    ingest.descriptor.resource_class = policy::ResourceClass::PUBLIC;
    ingest.descriptor.taint = result.delivered_taint;
    ingest.descriptor.tool = "a2a.receive";
    const std::string artifact = allocate_artifact(*receiver);
    ingest.produced_artifact = artifact;
    if (receiver->graph.append_action(std::move(ingest)).ok()) {
      receiver->artifact_contents[artifact] = body;
      receiver->context_sources.push_back(artifact);
    }
  }

  wire::Envelope out;
  out.kind = wire::EnvelopeKind::VERDICT;
  out.session_id = session.descriptor.session_id;
  out.seq = env.seq;
  out.payload = verdict_to_json(result.verdict);
  out.payload["delivered"] = result.delivered;
  return {out};
}

std::vector<wire::Envelope> Gateway::route_memory_write(const wire::Envelope& env,
                                                        Session& session) {
  std::string content;
  TaintLabel taint = taint_from_payload(env.payload, {Provenance::USER, Sensitivity::INTERNAL});
  if (env.payload.contains("content_from_artifact")) {
    const std::string artifact = env.payload["content_from_artifact"].get<std::string>();
    const auto it = session.artifact_contents.find(artifact);
    if (it == session.artifact_contents.end()) {
      return {error_envelope("UNKNOWN_ARTIFACT", "no such artifact " + artifact, env)};
    }
    content = it->second;
    if (const auto artifact_taint = session.graph.artifact_taint(artifact)) {
      taint = join(taint, *artifact_taint);
    }
  } else {
    content = env.payload.value("content", "");
  }
  taint = join(taint, session.context_taint);

  const auto result = memory_.vet_write(content, taint, session.descriptor.session_id,
                                        deps_.lexicon, clock_);
  wire::Envelope out;
  out.kind = wire::EnvelopeKind::VERDICT;
  out.session_id = session.descriptor.session_id;
  out.seq = env.seq;
  out.payload = verdict_to_json(result.verdict);
  if (result.stored_entry_id) out.payload["entry_id"] = *result.stored_entry_id;
  return {out};
}

Result<SessionDescriptor> Gateway::run_handshake(
    const std::string& principal, const std::vector<std::uint8_t>& secret, ChannelOrigin origin,
    Connection& conn, std::vector<wire::Envelope>* transcript,
    const std::vector<std::uint8_t>* presented_fingerprint) {
  conn.origin = origin;

  wire::Envelope hello;
  hello.kind = wire::EnvelopeKind::HELLO;
  {
    std::lock_guard lock(mutex_);
    hello.payload = {{"principal", principal}, {"client_nonce", fresh_hex(16)}};
  }
  if (transcript) transcript->push_back(hello);
  auto challenge_responses = handle(hello, conn);
  if (transcript) {
    transcript->insert(transcript->end(), challenge_responses.begin(),
                       challenge_responses.end());
  }
  if (challenge_responses.size() != 1 ||
      challenge_responses[0].kind != wire::EnvelopeKind::CHALLENGE) {
    const auto& err = challenge_responses.empty() ? nlohmann::json::object()
                                                  : challenge_responses[0].payload;
    return Result<SessionDescriptor>::failure(err.value("code", "PROTOCOL"),
                                              err.value("message", "handshake failed"));
  }

  // the client binds its proof to the fingerprint it believes it paired with
  const std::vector<std::uint8_t> fingerprint =
      presented_fingerprint ? *presented_fingerprint : config_.gateway_fingerprint;
  const auto client_nonce =
      hex_decode(hello.payload["client_nonce"].get<std::string>()).value();
  const auto server_nonce =
      hex_decode(challenge_responses[0].payload["server_nonce"].get<std::string>()).value();
  std::string mac_input(client_nonce.begin(), client_nonce.end());
  mac_input.append(server_nonce.begin(), server_nonce.end());
  mac_input.append(fingerprint.begin(), fingerprint.end());

  wire::Envelope proof;
  proof.kind = wire::EnvelopeKind::PROOF;
  proof.payload = {{"digest", digest_hex(hmac_sha256(secret, mac_input))}};
  if (transcript) transcript->push_back(proof);
  auto established = handle(proof, conn);
  if (transcript) {
    transcript->insert(transcript->end(), established.begin(), established.end());
  }
  if (established.size() != 1 || established[0].kind != wire::EnvelopeKind::ESTABLISHED) {
    const auto& err =
        established.empty() ? nlohmann::json::object() : established[0].payload;
    return Result<SessionDescriptor>::failure(err.value("code", "PROTOCOL"),
                                              err.value("message", "handshake failed"));
  }
  std::lock_guard lock(mutex_);
  return sessions_.at(conn.session_id).descriptor;
}

Verdict Gateway::pipeline_evaluate(const ToolCallRequest& call, const std::string& session_id) {
  std::lock_guard lock(mutex_);
  Session* session = session_for(session_id);
  if (session == nullptr || session->terminated) {
    Verdict verdict;
    verdict.disposition = Disposition::DENY;
    verdict.stage = "pipeline";
    verdict.add_finding({"pipeline.session_unknown", Severity::HIGH, session_id,
                         "no such session"});
    return verdict;
  }
  return evaluate_locked(call, *session, nullptr);
}

void Gateway::inject_fault(const std::string& stage) {
  std::lock_guard lock(mutex_);
  fault_stages_.insert(stage);
}

void Gateway::clear_faults() {
  std::lock_guard lock(mutex_);
  fault_stages_.clear();
}

std::optional<SessionDescriptor> Gateway::session_descriptor(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second.descriptor;
}

std::vector<DeliveredMessage> Gateway::inbox(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  return it == sessions_.end() ? std::vector<DeliveredMessage>{} : it->second.inbox;
}

bool Gateway::session_terminated(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  return it != sessions_.end() && it->second.terminated;
}

std::vector<std::string> Gateway::consumed_artifacts(const ToolCallRequest& call,
                                                     const Session& session) const {
  std::vector<std::string> out;
  const auto add = [&](const std::string& id) {
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  };
  for (const auto& [_, arg] : call.args) {
    if (arg.value.empty()) continue;
    if (const auto by_raw = session.graph.artifact_by_locator(arg.value)) add(*by_raw);
    const std::string normalized = normalize_path(arg.value, config_.home);
    if (normalized != arg.value) {
      if (const auto by_norm = session.graph.artifact_by_locator(normalized)) add(*by_norm);
    }
  }
  if (session.context_taint.provenance >= Provenance::SKILL_THIRD_PARTY) {
    for (const auto& id : session.context_sources) add(id);
  }
  return out;
}

std::string Gateway::allocate_artifact(Session& session) {
  return "a" + std::to_string(session.next_artifact++);
}

Verdict Gateway::evaluate_locked(const ToolCallRequest& call, Session& session,
                                 std::vector<wire::Envelope>* extra_responses) {
  Verdict verdict;
  verdict.stage = "pipeline";

  // classification precedes every stage; an unknown tool fails closed
  auto classified =
      policy::classify_action(call, deps_.tool_registry, deps_.sensitive_paths, config_.home);
  if (!classified.ok()) {
    verdict.disposition = Disposition::DENY;
    verdict.stage = "policy";
    verdict.add_finding(
        {"policy.unknown_tool", Severity::HIGH, call.tool, classified.error().message});
    apply_mitigations(verdict, session);
    return verdict;
  }
  const policy::ActionDescriptor action = classified.take();
  const std::vector<std::string> consumed = consumed_artifacts(call, session);

  Disposition aggregate = Disposition::ALLOW;
  std::string deciding_stage = "pipeline";
  bool decided_flag = false;

  for (const auto& stage : config_.pipeline_order) {
    StageOutcome outcome;
    try {
      if (fault_stages_.count(stage) > 0) {
        throw std::runtime_error("injected fault in stage " + stage);
      }
      if (stage == "policy") {
        outcome = stage_policy(session, action);
      } else if (stage == "correlate") {
        outcome = stage_correlate(call, action);
      } else if (stage == "trajectory") {
        outcome = stage_trajectory(call, session, action, consumed);
      } else if (stage == "sandbox") {
        outcome = stage_sandbox(call, session, action, consumed, extra_responses);
      }
    } catch (const std::exception& e) {
      outcome.disposition = Disposition::DENY;
      outcome.findings = {{"stage.internal", Severity::HIGH, stage, e.what()}};
    }

    for (auto& f : outcome.findings) verdict.findings.push_back(std::move(f));
    if (outcome.disposition == Disposition::DENY) {
      verdict.disposition = Disposition::DENY;
      verdict.stage = outcome.stage_label.empty() ? stage : outcome.stage_label;
      apply_mitigations(verdict, session);
      return verdict;  // first DENY short-circuits; later stages never run
    }
    if (outcome.disposition == Disposition::FLAG && !decided_flag) {
      decided_flag = true;
      deciding_stage = outcome.stage_label.empty() ? stage : outcome.stage_label;
      aggregate = Disposition::FLAG;
    }
  }

  verdict.disposition = aggregate;
  verdict.stage = aggregate == Disposition::ALLOW ? "pipeline" : deciding_stage;
  apply_mitigations(verdict, session);
  return verdict;
}

Gateway::StageOutcome Gateway::stage_policy(Session& session,
                                            const policy::ActionDescriptor& action) {
  StageOutcome outcome;
  const auto* profile = profiles_.current(session.descriptor.profile_ref);
  policy::CapabilityProfile empty;
  empty.profile_id = session.descriptor.profile_ref;
  const auto decision = policy::evaluate(action, profile ? *profile : empty);
  outcome.disposition = decision.disposition;
  outcome.findings = decision.findings;
  return outcome;
}

Gateway::StageOutcome Gateway::stage_correlate(const ToolCallRequest& call,
                                               const policy::ActionDescriptor& action) {
  StageOutcome outcome;
  const auto intent = intent_classifier_->extract(call.reasoning_excerpt);
  const auto cv = trajectory::correlate(intent, action);
  outcome.disposition = cv.disposition;
  if (cv.finding) outcome.findings.push_back(*cv.finding);
  return outcome;
}

Gateway::StageOutcome Gateway::stage_trajectory(const ToolCallRequest& call, Session& session,
                                                const policy::ActionDescriptor& action,
                                                const std::vector<std::string>& consumed) {
  (void)call;
  StageOutcome outcome;
  // detect on a copy extended with this call; commit happens only on execution
  trajectory::TrajectoryGraph probe = session.graph;
  trajectory::AtomicAction tentative;
  tentative.seq = probe.nodes().size() + 1;
  tentative.descriptor = action;
  tentative.produced_artifact = "pending";
  tentative.consumed_artifacts = consumed;
  const auto appended = probe.append_action(std::move(tentative));
  if (!appended.ok()) {
    outcome.disposition = Disposition::DENY;
    outcome.findings = {{"trajectory.graph_error", Severity::HIGH, call.tool,
                         appended.error().message}};
    return outcome;
  }
  probe.propagate_taint();

  const auto* profile = profiles_.current(session.descriptor.profile_ref);
  policy::CapabilityProfile empty;
  const auto chains = trajectory::detect_stac(probe, profile ? *profile : empty,
                                              deps_.chain_rules);
  const std::uint64_t this_seq = probe.nodes().back().seq;
  for (const auto& chain : chains) {
    if (chain.node_path.empty() || chain.node_path.back() != this_seq) continue;
    std::string path;
    for (std::size_t i = 0; i < chain.node_path.size(); ++i) {
      if (i > 0) path += "->";
      path += "n" + std::to_string(chain.node_path[i]);
    }
    outcome.findings.push_back({chain.rule_id, chain.severity, path, chain.message});
    const Disposition d = disposition_for_severity(chain.severity);
    outcome.disposition = std::max(outcome.disposition, d);
  }
  return outcome;
}

Gateway::StageOutcome Gateway::stage_sandbox(const ToolCallRequest& call, Session& session,
                                             const policy::ActionDescriptor& action,
                                             const std::vector<std::string>& consumed,
                                             std::vector<wire::Envelope>* extra_responses) {
  StageOutcome outcome;
  const auto* tool = deps_.tool_registry.find(call.tool);
  if (tool == nullptr) {
    outcome.disposition = Disposition::DENY;
    outcome.findings = {{"sandbox.unknown_tool", Severity::HIGH, call.tool, "unregistered"}};
    return outcome;
  }
  const auto* profile = profiles_.current(session.descriptor.profile_ref);
  policy::CapabilityProfile empty;
  empty.profile_id = session.descriptor.profile_ref;
  const policy::CapabilityProfile& prof = profile ? *profile : empty;

  // ---- provision ----
  std::vector<std::string> consumed_locators;
  for (const auto& id : consumed) {
    const auto& artifacts = session.graph.artifacts();
    const auto it = artifacts.find(id);
    if (it != artifacts.end() && !it->second.locator.empty() &&
        it->second.locator.find(':') == std::string::npos) {
      consumed_locators.push_back(it->second.locator);
    }
  }
  sandbox::SandboxSpec minimal = sandbox::derive_spec(*tool, call, consumed_locators,
                                                      config_.home);
  auto validated = sandbox::validate_spec(minimal, minimal, prof);
  if (!validated.ok()) {
    outcome.disposition = Disposition::DENY;
    outcome.findings = {{"sandbox.spec_violation", Severity::HIGH, action.resource,
                         validated.error().message}};
    return outcome;
  }
  sandbox::SandboxSpec spec = validated.take();
  if (action.category == policy::ActionCategory::EXECUTE) {
    // a spawned process sees exactly what the profile grants, nothing else
    for (const auto& rule : prof.allowed) {
      if (rule.category == policy::ActionCategory::READ_LOCAL) {
        spec.fs_view.push_back({rule.resource_pattern, false});
      } else if (rule.category == policy::ActionCategory::WRITE_LOCAL) {
        spec.fs_view.push_back({rule.resource_pattern, true});
      }
    }
  }
  if (session.egress_revoked) spec.net_view.clear();

  const std::uint64_t node_seq = session.graph.nodes().size() + 1;
  sandbox::MediatedEnvironment env(spec, vfs_, vnet_, telemetry_,
                                   session.descriptor.session_id, node_seq,
                                   /*flagged=*/false, clock_);

  // ---- execute ----
  const auto arg_value = [&](const std::string& name) -> std::string {
    const auto it = call.args.find(name);
    return it == call.args.end() ? std::string{} : it->second.value;
  };
  const auto resolve_payload = [&](const std::string& raw) -> std::string {
    // argument values naming a prior artifact send that artifact's bytes
    if (const auto id = session.graph.artifact_by_locator(raw)) {
      const auto it = session.artifact_contents.find(*id);
      if (it != session.artifact_contents.end()) return it->second;
    }
    const std::string normalized = normalize_path(raw, config_.home);
    if (const auto id = session.graph.artifact_by_locator(normalized)) {
      const auto it = session.artifact_contents.find(*id);
      if (it != session.artifact_contents.end()) return it->second;
    }
    if (const auto file = vfs_.get(normalized)) return *file;
    return raw;
  };

  std::optional<std::string> produced_locator;
  std::optional<std::string> produced_content;
  std::map<sandbox::EventKind, int> counts;
  bool any_permitted = false;
  int blocked = 0;

  const auto run_op = [&](sandbox::MediateOp op) {
    const auto result = env.mediate(op);
    ++counts[op.kind];
    if (result.outcome == sandbox::EventOutcome::PERMITTED) {
      any_permitted = true;
      if (result.artifact_content) {
        produced_locator = result.artifact_locator;
        produced_content = result.artifact_content;
      }
    } else {
      ++blocked;
      outcome.findings.push_back({"sandbox.blocked", Severity::MED, op.target,
                                  std::string(sandbox::event_kind_name(op.kind)) +
                                      " outside the provisioned view"});
    }
  };

  if (call.tool == "memory.recall") {
    const std::string entry_id = arg_value("entry_id");
    const auto read = memory_.vet_read(entry_id);
    if (!read.ok()) {
      outcome.disposition = Disposition::FLAG;
      outcome.findings.push_back(
          {"memory.not_found", Severity::MED, entry_id, read.error().message});
    } else {
      produced_locator = "memory:" + entry_id;
      produced_content = read.value().content;
      for (const auto& f : read.value().findings) outcome.findings.push_back(f);
      session.context_taint = join(session.context_taint, read.value().taint);
    }
  } else if (tool->plan.empty() && call.tool == "text.summarize") {
    std::string source;
    if (!consumed.empty()) {
      const auto it = session.artifact_contents.find(consumed.front());
      if (it != session.artifact_contents.end()) source = it->second;
    }
    if (source.empty()) source = resolve_payload(arg_value("input"));
    produced_locator = "derived:summarize:" + std::to_string(node_seq);
    produced_content = source.substr(0, 160);
  } else {
    for (const auto& step : tool->plan) {
      sandbox::MediateOp op;
      std::string target = arg_value(step.from_arg);
      if (step.from_arg == tool->resource_arg && !tool->resource_prefix.empty()) {
        target = tool->resource_prefix + target;
      }
      switch (step.op) {
        case policy::ToolOp::FS_READ:
          op.kind = sandbox::EventKind::FS_READ;
          op.target = normalize_path(target, config_.home);
          break;
        case policy::ToolOp::FS_WRITE:
          op.kind = sandbox::EventKind::FS_WRITE;
          op.target = normalize_path(target, config_.home);
          op.payload = resolve_payload(arg_value(tool->content_arg.empty() ? "content"
                                                                           : tool->content_arg));
          break;
        case policy::ToolOp::FS_DELETE:
          op.kind = sandbox::EventKind::FS_DELETE;
          op.target = normalize_path(target, config_.home);
          break;
        case policy::ToolOp::NET_CONNECT:
          op.kind = sandbox::EventKind::NET_CONNECT;
          op.target = url_host(target);
          break;
        case policy::ToolOp::NET_SEND:
          op.kind = sandbox::EventKind::NET_SEND;
          op.target = url_host(target);
          op.payload = resolve_payload(arg_value(tool->content_arg.empty() ? "body"
                                                                           : tool->content_arg));
          break;
        case policy::ToolOp::PROC_SPAWN:
          op.kind = sandbox::EventKind::PROC_SPAWN;
          op.target = target;
          break;
      }
      run_op(op);
      if (step.op == policy::ToolOp::PROC_SPAWN && tool->scan_command_paths) {
        // paths named in the command model what the child process touches
        std::string token;
        const auto flush = [&] {
          if ((token.starts_with('/') || token.starts_with('~') || token.starts_with("./")) &&
              token.size() >= 4) {
            run_op({sandbox::EventKind::FS_READ, normalize_path(token, config_.home), ""});
          }
          token.clear();
        };
        for (char c : arg_value(step.from_arg)) {
          if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
          } else {
            token.push_back(c);
          }
        }
        flush();
      }
    }
  }

  // ---- perception boundary on network-produced content ----
  TaintLabel artifact_extra_taint{Provenance::TRUSTED_OPERATOR, Sensitivity::PUBLIC};
  const bool network_content = action.category == policy::ActionCategory::NETWORK_FETCH ||
                               action.category == policy::ActionCategory::NETWORK_SEND;
  if (network_content && produced_content && !produced_content->empty()) {
    sanitizer::RawInput raw;
    raw.content = *produced_content;
    raw.media_kind = produced_content->find('<') != std::string::npos
                         ? sanitizer::MediaKind::HTML
                         : sanitizer::MediaKind::PLAIN;
    raw.origin = Provenance::UNTRUSTED_EXTERNAL;
    raw.source_locator = action.resource;
    const auto sanitized = sanitizer::sanitize(raw, deps_.lexicon);
    if (!sanitized.ok()) {
      outcome.disposition = Disposition::DENY;
      outcome.stage_label = "sanitizer";
      outcome.findings.push_back({"sanitizer.decode_error", Severity::HIGH, action.resource,
                                  sanitized.error().message});
      produced_content.reset();
      produced_locator.reset();
    } else {
      const auto& doc = sanitized.value();
      for (const auto& f : doc.findings) {
        outcome.findings.push_back(
            {f.rule_id, f.severity, action.resource + (f.span.hidden ? " (hidden)" : ""),
             f.message});
      }
      if (doc.has_severity_at_least(Severity::CRITICAL)) {
        // hostile instructions never reach the agent's context
        outcome.disposition = Disposition::DENY;
        outcome.stage_label = "sanitizer";
        produced_content.reset();
        produced_locator.reset();
      } else {
        produced_content = doc.joined_visible();
        artifact_extra_taint = doc.taint;
        if (doc.has_severity_at_least(Severity::MED)) {
          outcome.disposition = std::max(outcome.disposition, Disposition::FLAG);
        }
      }
    }
  }
  if (call.tool == "memory.recall" && produced_content) {
    const auto read = memory_.vet_read(arg_value("entry_id"));
    if (read.ok()) artifact_extra_taint = read.value().taint;
  }

  if (blocked > 0) {
    outcome.disposition = std::max(outcome.disposition, Disposition::FLAG);
  }

  // ---- commit the action to the session trajectory ----
  trajectory::AtomicAction committed;
  committed.seq = node_seq;
  committed.descriptor = action;
  committed.consumed_artifacts = consumed;
  std::string artifact_id;
  if (produced_content) {
    artifact_id = allocate_artifact(session);
    committed.produced_artifact = artifact_id;
  }
  if (session.graph.append_action(std::move(committed)).ok() && !artifact_id.empty()) {
    session.artifact_contents[artifact_id] = *produced_content;
    session.graph.raise_artifact_taint(artifact_id, artifact_extra_taint);
    if (artifact_extra_taint.provenance >= Provenance::SKILL_THIRD_PARTY) {
      session.context_taint = join(session.context_taint, artifact_extra_taint);
      session.context_sources.push_back(artifact_id);
    }
    session.graph.propagate_taint();
  }

  // ---- behavioral baselines ----
  sandbox::InvocationSummary summary;
  summary.profile_id = session.descriptor.profile_ref;
  summary.tool = call.tool;
  summary.resource_class = action.resource_class;
  for (const auto& [kind, count] : counts) summary.counts[kind] = count;
  summary.any_permitted = any_permitted;
  const auto alerts = baselines_.detect_anomaly(summary);
  baselines_.update(summary);
  for (const auto& alert : alerts) {
    governance_.append("alert", {{"rule", alert.rule_id},
                                 {"session", session.descriptor.session_id},
                                 {"tool", call.tool},
                                 {"message", alert.message}});
    const auto mitigation = sandbox::decide_mitigation(alert);
    if (mitigation.kind == MitigationKind::REVOKE_EGRESS) {
      governance_.append("mitigation", {{"kind", "REVOKE_EGRESS"},
                                        {"session", session.descriptor.session_id},
                                        {"reason", alert.rule_id}});
      session.egress_revoked = true;
    }
  }

  // ---- deliver the result ----
  if (extra_responses != nullptr && produced_content &&
      outcome.disposition != Disposition::DENY) {
    wire::Envelope result;
    result.kind = wire::EnvelopeKind::TOOL_RESULT;
    result.payload = {{"artifact", artifact_id}, {"content", *produced_content}};
    extra_responses->push_back(std::move(result));
  }
  return outcome;
}

void Gateway::apply_mitigations(Verdict& verdict, Session& session) {
  for (const auto& finding : verdict.findings) {
    if (finding.severity != Severity::CRITICAL) continue;
    for (const auto& action : sandbox::decide_mitigations(finding, /*skill_attributed=*/false)) {
      if (action.kind == MitigationKind::NONE) continue;
      // the governance record precedes the effect
      governance_.append("mitigation", {{"kind", std::string(mitigation_name(action.kind))},
                                        {"session", session.descriptor.session_id},
                                        {"reason", action.reason_finding}});
      if (action.kind == MitigationKind::TERMINATE_SESSION) session.terminated = true;
      if (action.kind == MitigationKind::REVOKE_EGRESS) session.egress_revoked = true;
      if (!verdict.mitigation) verdict.mitigation = action;
    }
  }
}

}  // namespace clawguard::gateway
