#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "agora/common/error.hpp"
#include "agora/common/json.hpp"
#include "agora/common/value.hpp"
#include "agora/engine/engine.hpp"

namespace agora::acp {

/// Version tag carried by every ACP payload on the wire.
inline constexpr std::string_view kWireVersion = "acp/1";

enum class FieldKind {
    String,
    Integer,
    Number,       // dollars with at most two decimals
    Enum,
    Participant,  // participant code of another participant
    Transaction,  // transaction id of a visible pending offer
    IndexList,    // order-line indices
};

struct FieldSchema {
    std::string name;
    FieldKind kind = FieldKind::String;
    bool required = true;
    std::vector<std::string> variants;  // Enum
    std::optional<double> min;
    std::optional<double> max;
    std::string description;
    /// Paradigm-defined arguments: checked against the declared type in display units.
    std::optional<TypeSpec> ecl_type;
};

/// One permitted action, in the field vocabulary agents write.
struct ActionSchema {
    std::string type;
    std::string description;
    std::vector<FieldSchema> fields;

    const FieldSchema* find(std::string_view name) const;
};

struct PeerInfo {
    std::string participant_id;
    std::string display_name;
    std::string group;
};

struct AgentContext {
    std::string session_id;
    std::string participant_id;
    std::string display_name;
    std::string group;
    std::string role;
    std::string experiment_rules;
    std::vector<ActionSchema> permitted_actions;
    /// "private" or "group"; empty when chat is disabled.
    std::vector<std::string> communication_channels;
    Duration perception_interval;
    std::set<std::string> private_state_spec;  // own.* and module.*
    std::set<std::string> public_state_spec;   // peer.* and dashboard*
    std::string persona_profile;
    std::vector<PeerInfo> peers;
    /// Paradigm parameters in display units, for prompt placeholders.
    json parameters = json::object();
    /// Messages involving the agent carried in each summary.
    std::size_t message_history = 20;

    const ActionSchema* find_action(std::string_view type) const;
    bool permits(std::string_view selector) const;
};

/// Throws Error(NotAnAgent) for a human seat, Error(UnknownParticipant) for an unknown one.
AgentContext build_agent_context(const engine::SessionState& s, const std::string& participant_id);

struct FailedAction {
    json action;
    std::string error;
};

struct StateSummary {
    std::int64_t timestamp_ms = 0;
    std::int64_t remaining_ms = 0;
    json visible_state;
    json new_messages = json::array();
    json message_history = json::array();
    json pending_offers = json::array();
    std::vector<FailedAction> failed_actions;
};

/// Per-agent position in the session: what the last summary already reported.
struct SummaryCursor {
    std::int64_t last_message_id = 0;
    std::vector<FailedAction> unreported_failures;
};

/// Snapshot of the visible state plus deltas since `cursor`, which is advanced.
/// Throws std::logic_error if the snapshot carries a selector outside the
/// context's specs; that would be a leak, never an agent error.
StateSummary compose_state_summary(const engine::SessionState& s, const AgentContext& ctx, std::int64_t now,
                                   SummaryCursor& cursor);

struct AgentAction {
    std::string type;
    json fields = json::object();  // normalized: ids resolved, prices rounded to cents
    std::string reasoning;
};

struct AgentResponse {
    std::string planning;
    std::vector<AgentAction> actions;  // empty: wait
};

struct ValidationError {
    ErrorCode code = ErrorCode::MalformedResponse;
    int action_index = -1;  // -1 for the response as a whole
    std::string field;
    std::string reason;

    std::string str() const;
};

using Validation = std::variant<AgentResponse, std::vector<ValidationError>>;

/// Parses and checks a raw response. Every action is checked; the error list
/// holds the first problem of each bad action. Total over arbitrary bytes.
/// `pending_offers` is the summary's list, which transaction ids must come from.
Validation validate_agent_response(std::string_view raw, const AgentContext& ctx, const json& pending_offers);

/// Engine request for a validated action (price dollars become cents,
/// recipients become a list, display names become participant ids).
engine::ActionRequest to_engine_request(const AgentAction& a, const AgentContext& ctx);

json to_json(const ActionSchema& a);
json to_json(const AgentContext& c);
json to_json(const StateSummary& s);
json to_json(const AgentResponse& r);
json to_json(const ValidationError& e);
/// JSON Schema (draft 2020-12) of the response format for this context.
json response_json_schema(const AgentContext& c);

}  // namespace agora::acp
