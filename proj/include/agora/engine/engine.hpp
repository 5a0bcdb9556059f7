#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agora/common/error.hpp"
#include "agora/engine/state.hpp"

namespace agora::engine {

/// An intended action. `args` uses the internal wire style (money in cents,
/// durations in ms). Built-in argument shapes:
///   message              {"recipients": [pid...], "body": str}
///   propose_trade_offer  {"target": pid, "offer_type": "buy"|"sell", "shape": s,
///                         "price_cents": int, "counter_to"?: id}
///   cancel_trade_offer   {"transaction_id": id}
///   trade_response       {"transaction_id": id, "response_type": "accept"|"decline"}
///   produce_shape        {"shape": s, "quantity": int}
///   fulfill_order        {"order_indices": [int...]}
/// Paradigm-defined actions take their declared ECL arguments by name.
/// An optional "reasoning" string is carried into the event untouched.
struct ActionRequest {
    std::string actor;
    std::string type;
    json args = json::object();
};

json request_to_json(const ActionRequest& r);
ActionRequest request_from_json(const json& j);

/// actor is a participant id or "system"; system events carry the `cause`
/// that produced them ("start", "tick" or "command").
struct CommittedEvent {
    std::int64_t seq = 0;
    std::int64_t ts = 0;
    std::string actor;
    json action;
    json delta;
    std::string cause;

    bool is_system() const { return actor == kSystemActor; }
    static constexpr std::string_view kSystemActor = "system";
    bool operator==(const CommittedEvent&) const = default;
};

json event_to_json(const CommittedEvent& e);
/// Throws Error(CorruptLog) on a record that does not have the event shape.
CommittedEvent event_from_json(const json& j);

struct Commit {
    SessionState state;
    CommittedEvent event;
};

using ActionResult = std::variant<Commit, Denial>;

struct Transition {
    SessionState state;
    std::vector<CommittedEvent> events;
};

/// Called at named checkpoints while an action is being applied to the
/// working copy. Throwing from it aborts the action with no effect on the
/// input state; tests use it to inject mid-commit failures.
using FaultHook = std::function<void(std::string_view checkpoint)>;

/// Fresh state in phase `created`. Specialties go round-robin over the shape
/// types in roster order; orders are drawn from a per-participant stream
/// derived from `seed` and never contain the participant's specialty.
/// Throws RosterMismatch, DuplicateRoster or InvalidControls.
SessionState instantiate_session(std::shared_ptr<const ecl::ExperimentConfig> config,
                                 controls::InteractionControls controls, const std::vector<RosterEntry>& roster,
                                 std::string session_id, std::uint64_t seed);

/// created -> live. Throws WrongPhase.
Transition start_session(const SessionState& s, std::int64_t now);

/// Completes jobs due by min(now, session end) in completes_at order; at or
/// past the end also expires pending offers and ends the session. Events carry
/// ts = now. A non-live session is returned unchanged. Throws ClockRegression.
Transition tick(const SessionState& s, std::int64_t now);

/// Ends a live session on command: same finalization path as the timer.
/// Throws WrongPhase.
Transition end_session(const SessionState& s, std::int64_t now);

/// Validates and applies one action at `now`. Either every effect is applied
/// and exactly one event is produced, or the input is untouched and a Denial
/// is returned. Checks run in order: session and actor, built-in mechanics,
/// ECL preconditions and rules (on the pre-state), then costs and effects.
/// Throws ClockRegression when `now` is behind the last event.
ActionResult apply_action(const SessionState& s, const ActionRequest& req, std::int64_t now,
                          const FaultHook& fault = {});

/// Participant who may send chat messages at `now` under turn-taking.
std::string turn_holder(const SessionState& s, std::int64_t now);

/// Transaction id for offer number `n` of session `session_id`: "S123-001".
std::string transaction_id(const std::string& session_id, std::int64_t n);

}  // namespace agora::engine
