#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clawguard/common.hpp"
#include "clawguard/lexicon.hpp"
#include "clawguard/memory_guard.hpp"
#include "clawguard/policy.hpp"
#include "clawguard/sandbox.hpp"
#include "clawguard/skill_auditor.hpp"
#include "clawguard/taint.hpp"
#include "clawguard/tool_call.hpp"
#include "clawguard/trajectory.hpp"
#include "clawguard/verdict.hpp"
#include "clawguard/wire.hpp"

namespace clawguard::gateway {

enum class ChannelOrigin { LOOPBACK, LAN, REMOTE, INTER_AGENT };

std::string_view channel_origin_name(ChannelOrigin o);

struct PairingToken {
  std::string principal;
  std::vector<std::uint8_t> secret;  // 32 bytes; never serialized to logs or reports
  std::string profile;               // capability profile bound to the principal
};

struct GatewayConfig {
  std::string listen_endpoint = "127.0.0.1:7433";
  std::vector<std::uint8_t> gateway_fingerprint;  // 32 bytes
  std::vector<PairingToken> pairing_tokens;
  bool loopback_exempt = false;  // dangerous; exists to reproduce the CVE class in tests
  std::vector<std::string> pipeline_order = {"policy", "correlate", "trajectory", "sandbox"};
  std::string home = "/home/u";
  std::string default_profile = "default";
};

Status validate_config(const GatewayConfig& config);
Result<GatewayConfig> config_from_json(const nlohmann::json& j);
// Redacts pairing secrets; configs echoed into logs or reports carry none.
nlohmann::json config_to_json(const GatewayConfig& config);
Result<GatewayConfig> load_config_file(const std::string& path);

struct SessionDescriptor {
  std::string session_id;  // 16-byte identifier, hex encoded
  std::string principal;
  std::string established_at;
  ChannelOrigin channel_origin = ChannelOrigin::REMOTE;
  std::string profile_ref;
};

struct DeliveredMessage {
  std::string from_principal;
  std::string body;
  TaintLabel taint;
};

// Per-connection handshake state; the transport layer owns one per peer.
struct Connection {
  ChannelOrigin origin = ChannelOrigin::REMOTE;
  std::string pending_principal;
  std::string pending_client_nonce;  // hex
  std::string pending_server_nonce;  // hex
  std::string session_id;            // bound after ESTABLISHED
};

// Swappable dependencies; the defaults are the shipped data files' content.
struct GatewayDeps {
  Lexicon lexicon = default_lexicon();
  trajectory::VerbLexicon verb_lexicon = trajectory::default_verb_lexicon();
  policy::SensitivePathList sensitive_paths = policy::default_sensitive_paths();
  trajectory::ChainRules chain_rules = trajectory::default_chain_rules();
  policy::ToolRegistry tool_registry = policy::default_tool_registry();
};

class Gateway {
public:
  explicit Gateway(GatewayConfig config, GatewayDeps deps = {},
                   std::uint64_t rng_seed = 0x434c4157u, Clock clock = system_clock());

  // ---- operator surface ----
  void put_profile(policy::CapabilityProfile profile);
  const policy::CapabilityProfile* profile(const std::string& profile_id) const;
  Result<int> pin(const std::string& profile_id, policy::PinnedConstraint constraint,
                  Provenance actor);

  // ---- wire entry point ----
  std::vector<wire::Envelope> handle(const wire::Envelope& env, Connection& conn);

  // Client-side convenience: performs the three-step handshake against this
  // gateway. `presented_fingerprint` lets tests model a client that paired
  // with an attacker-substituted gateway. Appends both directions to
  // `transcript` when given.
  Result<SessionDescriptor> run_handshake(const std::string& principal,
                                          const std::vector<std::uint8_t>& secret,
                                          ChannelOrigin origin, Connection& conn,
                                          std::vector<wire::Envelope>* transcript = nullptr,
                                          const std::vector<std::uint8_t>* presented_fingerprint =
                                              nullptr);

  // ---- pipeline (exposed for tests; handle() routes TOOL_CALL here) ----
  Verdict pipeline_evaluate(const ToolCallRequest& call, const std::string& session_id);

  // Fault hook: the named stage throws on its next evaluations.
  void inject_fault(const std::string& stage);
  void clear_faults();

  // ---- world and telemetry surfaces (harness + CLI) ----
  sandbox::VirtualFs& vfs() { return vfs_; }
  sandbox::VirtualNet& vnet() { return vnet_; }
  sandbox::TelemetryLog& telemetry() { return telemetry_; }
  sandbox::GovernanceLog& governance() { return governance_; }
  memory::MemoryStore& memory_store() { return memory_; }
  audit::AdmissionLedger& admission_ledger() { return ledger_; }
  const GatewayConfig& config() const { return config_; }

  std::optional<SessionDescriptor> session_descriptor(const std::string& session_id) const;
  std::vector<DeliveredMessage> inbox(const std::string& session_id) const;
  bool session_terminated(const std::string& session_id) const;

private:
  struct Session {
    SessionDescriptor descriptor;
    std::uint64_t expected_seq = 1;
    TaintLabel context_taint = {Provenance::TRUSTED_OPERATOR, Sensitivity::PUBLIC};
    std::vector<std::string> context_sources;  // artifacts that raised context taint
    trajectory::TrajectoryGraph graph;
    std::map<std::string, std::string> artifact_contents;
    std::uint64_t next_artifact = 1;
    bool terminated = false;
    bool egress_revoked = false;
    std::vector<DeliveredMessage> inbox;
  };

  struct StageOutcome {
    Disposition disposition = Disposition::ALLOW;
    std::vector<Finding> findings;
    std::string stage_label;  // overrides the pipeline stage id when deciding
  };

  wire::Envelope error_envelope(const std::string& code, const std::string& message,
                                const wire::Envelope& cause) const;
  std::string fresh_hex(std::size_t bytes);
  std::string fresh_session_id();
  const PairingToken* token_for(const std::string& principal) const;
  Session* session_for(const std::string& session_id);
  std::string profile_id_for(const std::string& principal) const;

  std::vector<wire::Envelope> handle_hello(const wire::Envelope& env, Connection& conn);
  std::vector<wire::Envelope> handle_proof(const wire::Envelope& env, Connection& conn);
  std::vector<wire::Envelope> handle_session_envelope(const wire::Envelope& env, Connection& conn);
  std::vector<wire::Envelope> route_tool_call(const wire::Envelope& env, Session& session);
  std::vector<wire::Envelope> route_agent_msg(const wire::Envelope& env, Session& session);
  std::vector<wire::Envelope> route_memory_write(const wire::Envelope& env, Session& session);

  Verdict evaluate_locked(const ToolCallRequest& call, Session& session,
                          std::vector<wire::Envelope>* extra_responses);
  StageOutcome stage_policy(Session& session, const policy::ActionDescriptor& action);
  StageOutcome stage_correlate(const ToolCallRequest& call,
                               const policy::ActionDescriptor& action);
  StageOutcome stage_trajectory(const ToolCallRequest& call, Session& session,
                                const policy::ActionDescriptor& action,
                                const std::vector<std::string>& consumed);
  StageOutcome stage_sandbox(const ToolCallRequest& call, Session& session,
                             const policy::ActionDescriptor& action,
                             const std::vector<std::string>& consumed,
                             std::vector<wire::Envelope>* extra_responses);
  void apply_mitigations(Verdict& verdict, Session& session);
  std::vector<std::string> consumed_artifacts(const ToolCallRequest& call,
                                              const Session& session) const;
  std::string allocate_artifact(Session& session);

  GatewayConfig config_;
  GatewayDeps deps_;
  std::unique_ptr<trajectory::IntentClassifier> intent_classifier_;
  Clock clock_;

  mutable std::mutex mutex_;
  std::mt19937_64 rng_;
  policy::ProfileStore profiles_;
  std::map<std::string, Session> sessions_;
  std::set<std::string> used_nonces_;  // principal|client_nonce
  std::set<std::string> fault_stages_;

  sandbox::VirtualFs vfs_;
  sandbox::VirtualNet vnet_;
  sandbox::TelemetryLog telemetry_;
  sandbox::GovernanceLog governance_;
  sandbox::BehaviorBaselines baselines_;
  memory::MemoryStore memory_;
  audit::AdmissionLedger ledger_;

public:
  sandbox::BehaviorBaselines& baselines() { return baselines_; }
};

}  // namespace clawguard::gateway
