#pragma once

#include <functional>
#include <memory>
#include <string>

#include "agora/acp/loop.hpp"
#include "agora/agents/prompt.hpp"

namespace agora::agents {

/// Where completions come from. The key itself is never stored here, only the
/// name of the environment variable that holds it.
struct CompletionEndpointConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o";
    std::string api_key_env = "AGORA_LLM_API_KEY";
    double temperature = 0.7;
    Duration timeout{30000};
    int max_attempts = 3;

    /// Reads AGORA_LLM_BASE_URL and AGORA_LLM_MODEL when set.
    static CompletionEndpointConfig from_env();
};

json endpoint_to_json(const CompletionEndpointConfig& c);
CompletionEndpointConfig endpoint_from_json(const json& j);

struct Incident {
    std::string participant_id;
    ErrorCode code = ErrorCode::EndpointUnavailable;
    int attempts = 0;
    std::string detail;
};

/// Response text used when no completion could be obtained.
std::string degraded_wait_response(std::string_view why);

/// Sends one chat-completions request per attempt to {base_url}/chat/completions
/// and returns the first choice's message content. Transport errors and 5xx
/// answers are retried; after max_attempts, or at once on 401/403, the
/// incident is reported and a wait response returned. Requests never outlive
/// the cycle budget: running out of it throws Error(AgentTimeout).
class LlmStepper : public acp::AgentStepper {
public:
    using IncidentSink = std::function<void(const Incident&)>;

    LlmStepper(CompletionEndpointConfig endpoint, PromptTemplate prompt, controls::InteractionControls controls,
               IncidentSink incidents = {});

    std::string step(const acp::AgentContext& ctx, const acp::StateSummary& summary,
                     const std::vector<acp::ValidationError>& feedback, Duration budget) override;

    /// The request body for a rendered prompt (exposed for tests).
    json request_body(const std::string& prompt) const;

private:
    CompletionEndpointConfig endpoint_;
    PromptTemplate prompt_;
    controls::InteractionControls controls_;
    IncidentSink incidents_;
};

}  // namespace agora::agents
