#pragma once

#include <memory>
#include <string>

#include "aimaze/orchestration.hpp"
#include "aimaze/policies.hpp"

namespace aimaze {

struct TransportResult {
  bool ok = false;
  std::string body;   // raw response JSON when ok
  std::string error;  // failure description otherwise
};

/// Wire abstraction for a chat-completions endpoint with function calling.
/// Tests substitute a stub; production uses HttpChatTransport.
class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  virtual TransportResult complete(const std::string& request_body) = 0;
};

struct LlmConfig {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4.1-nano";
  std::string api_key_env = "OPENAI_API_KEY";  // credential source
  int timeout_ms = 30000;
  int max_retries = 2;
};

class HttpChatTransport final : public LlmTransport {
 public:
  explicit HttpChatTransport(LlmConfig config);
  TransportResult complete(const std::string& request_body) override;

 private:
  LlmConfig config_;
};

/// Rendered prompt templates (single-brace placeholders).
std::string render_execution_system_prompt(const PolicyContext& ctx);
std::string render_execution_context_message(const PolicyContext& ctx);
std::string render_orchestrator_system_prompt();
std::string render_orchestrator_context_message(const OrchestratorState& orch);

/// Full chat request body (system + context messages) for the
/// orchestrator cycle.
std::string render_orchestrator_request(const OrchestratorState& orch,
                                        const LlmConfig& config);

/// Tool schema advertised with every request.
std::string tool_definitions_json();

/// Chat policy speaking the tool protocol. One primary tool call per step
/// is enforced: extra primaries count as contract violations (first one
/// wins), unknown tools and transport errors surface as policy failures,
/// and the response tokens feed the entropy signal.
class LlmPolicy final : public Policy {
 public:
  LlmPolicy(std::shared_ptr<LlmTransport> transport, LlmConfig config);

  PolicyDecision decide(const PolicyContext& ctx, Rng& rng) override;
  std::string_view name() const override { return "llm"; }

  std::string render_request(const PolicyContext& ctx) const;
  static PolicyDecision parse_response(const std::string& body, int agent_id);

  int violation_count() const { return violations_; }
  const std::vector<std::string>& audit_log() const { return audit_log_; }

 private:
  std::shared_ptr<LlmTransport> transport_;
  LlmConfig config_;
  int violations_ = 0;
  std::vector<std::string> audit_log_;  // verbatim request/response bodies
};

/// Parses an orchestrator reply against the response contract
/// (analysis / corrections / guidance_for_agents), dropping any cell or
/// agent id that is not present in the given state.
struct OrchestratorReply {
  bool ok = false;
  std::string error;
  std::string analysis;
  Corrections corrections;
  std::map<int, std::string> guidance_text;
};
OrchestratorReply parse_orchestrator_reply(const std::string& body,
                                           const OrchestratorState& orch);

}  // namespace aimaze
