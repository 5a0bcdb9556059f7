#include "agora/agents/llm.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>

#include <httplib.h>

namespace agora::agents {

namespace {

std::int64_t mono_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // without trailing slash
};

Url split_url(const std::string& base) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(base, m, re)) throw Error(ErrorCode::InvalidConfig, "endpoint base_url must be http(s)://host[/path]");
    std::string path = m[2];
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {m[1], path};
}

}  // namespace

CompletionEndpointConfig CompletionEndpointConfig::from_env() {
    CompletionEndpointConfig c;
    if (const char* u = std::getenv("AGORA_LLM_BASE_URL"); u && *u) c.base_url = u;
    if (const char* m = std::getenv("AGORA_LLM_MODEL"); m && *m) c.model = m;
    return c;
}

json endpoint_to_json(const CompletionEndpointConfig& c) {
    return {{"base_url", c.base_url},
            {"model", c.model},
            {"api_key_env", c.api_key_env},
            {"temperature", c.temperature},
            {"timeout_ms", c.timeout.ms},
            {"max_attempts", c.max_attempts}};
}

CompletionEndpointConfig endpoint_from_json(const json& j) {
    CompletionEndpointConfig c;
    c.base_url = j.value("base_url", c.base_url);
    c.model = j.value("model", c.model);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.temperature = j.value("temperature", c.temperature);
    c.timeout = Duration{j.value("timeout_ms", c.timeout.ms)};
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    if (c.max_attempts < 1) throw Error(ErrorCode::InvalidConfig, "max_attempts must be at least 1");
    return c;
}

std::string degraded_wait_response(std::string_view why) {
    return json{{"planning", "waiting: " + std::string(why)}, {"actions", json::array()}}.dump();
}

LlmStepper::LlmStepper(CompletionEndpointConfig endpoint, PromptTemplate prompt, controls::InteractionControls controls,
                       IncidentSink incidents)
    : endpoint_(std::move(endpoint)), prompt_(std::move(prompt)), controls_(std::move(controls)),
      incidents_(std::move(incidents)) {
    split_url(endpoint_.base_url);  // reject a bad URL at construction
}

json LlmStepper::request_body(const std::string& prompt) const {
    return {{"model", endpoint_.model},
            {"temperature", endpoint_.temperature},
            {"messages", {{{"role", "user"}, {"content", prompt}}}}};
}

std::string LlmStepper::step(const acp::AgentContext& ctx, const acp::StateSummary& summary,
                             const std::vector<acp::ValidationError>& feedback, Duration budget) {
    const auto deadline = mono_ms() + budget.ms;
    const auto prompt = render_prompt(prompt_, prompt_values(ctx, controls_, summary, feedback));
    const auto body = request_body(prompt).dump();
    const auto url = split_url(endpoint_.base_url);

    httplib::Headers headers;
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto report = [&](ErrorCode code, int attempts, std::string detail) {
        if (incidents_) incidents_({ctx.participant_id, code, attempts, std::move(detail)});
        return degraded_wait_response(code == ErrorCode::AuthFailure ? "endpoint rejected credentials"
                                                                     : "endpoint unavailable");
    };

    std::string last_error;
    for (int attempt = 1; attempt <= endpoint_.max_attempts; ++attempt) {
        const auto left = deadline - mono_ms();
        if (left <= 0) throw Error(ErrorCode::AgentTimeout, "cycle budget spent waiting for the endpoint");
        const auto wait = std::chrono::milliseconds(std::min<std::int64_t>(left, endpoint_.timeout.ms));
        httplib::Client client(url.origin);
        client.set_connection_timeout(wait);
        client.set_read_timeout(wait);
        client.set_write_timeout(wait);
        auto res = client.Post(url.path + "/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = "transport: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            return report(ErrorCode::AuthFailure, attempt, "HTTP " + std::to_string(res->status));
        if (res->status >= 500 || res->status == 429) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) return report(ErrorCode::EndpointUnavailable, attempt, "HTTP " + std::to_string(res->status));
        auto j = json::parse(res->body, nullptr, false);
        const json* content = nullptr;
        if (j.is_object() && j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
            const auto& msg = j["choices"][0];
            if (msg.is_object() && msg.contains("message") && msg["message"].is_object() &&
                msg["message"].contains("content") && msg["message"]["content"].is_string())
                content = &msg["message"]["content"];
        }
        if (!content) return report(ErrorCode::EndpointUnavailable, attempt, "completion without message content");
        return content->get<std::string>();
    }
    if (deadline - mono_ms() <= 0) throw Error(ErrorCode::AgentTimeout, "cycle budget spent waiting for the endpoint");
    return report(ErrorCode::EndpointUnavailable, endpoint_.max_attempts, last_error);
}

}  // namespace agora::agents
