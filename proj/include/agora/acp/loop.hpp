#pragma once

#include <functional>
#include <stop_token>
#include <string>
#include <vector>

#include "agora/acp/acp.hpp"
#include "agora/engine/session.hpp"

namespace agora::acp {

/// Turns one summary into raw response text. Implemented by the LLM and the
/// scripted adapters; the loop treats both identically.
class AgentStepper {
public:
    virtual ~AgentStepper() = default;
    /// `feedback` holds the previous attempt's errors within this cycle (empty
    /// on the first attempt). May throw Error(AgentTimeout) when `budget` runs out.
    virtual std::string step(const AgentContext& ctx, const StateSummary& summary,
                             const std::vector<ValidationError>& feedback, Duration budget) = 0;
};

struct ScheduledAction {
    std::int64_t decided_at = 0;
    std::int64_t deliver_at = 0;
    engine::ActionRequest request;
    /// The action as the agent wrote it (normalized), echoed back on failure.
    json as_written;
};

enum class CycleStatus { Acted, Waited, TimedOut, RetriesExhausted, SessionOver };
std::string_view to_string(CycleStatus s);

struct CycleOutcome {
    CycleStatus status = CycleStatus::Waited;
    StateSummary summary;
    int attempts = 0;
    /// Errors sent back to the agent, one list per rejected attempt.
    std::vector<std::vector<ValidationError>> feedback;
    std::vector<ScheduledAction> scheduled;
    std::string planning;
};

/// Monotonic milliseconds used to enforce the per-cycle deadline.
using MonotonicClock = std::function<std::int64_t()>;
MonotonicClock steady_clock_ms();

/// The perceive-act loop of one agent seat. A cycle composes a summary from
/// the latest committed snapshot, asks the stepper, validates, and on errors
/// asks again with the errors as feedback, up to retry_limit regenerations.
/// All attempts share one deadline of one perception interval. Validated
/// actions are scheduled through the session's latency stream; deliver()
/// submits them through the same commit queue human actions use.
class AgentLoop {
public:
    static constexpr int kRetryLimit = 3;

    AgentLoop(AgentContext ctx, AgentStepper& stepper, engine::Session& session,
              MonotonicClock monotonic = steady_clock_ms(), int retry_limit = kRetryLimit);

    const AgentContext& context() const { return ctx_; }
    Duration interval() const { return ctx_.perception_interval; }

    CycleOutcome run_cycle(std::int64_t now);

    /// Submits one scheduled action. Nothing is submitted once the session has
    /// ended. Denials are reported in the next summary's failed_actions.
    std::optional<engine::SubmitResult> deliver(const ScheduledAction& a);

private:
    AgentContext ctx_;
    AgentStepper& stepper_;
    engine::Session& session_;
    MonotonicClock monotonic_;
    int retry_limit_;
    SummaryCursor cursor_;
    std::mutex cursor_mu_;
};

/// Observer for the real-time driver (incident logging, typing indicators).
struct LoopObserver {
    std::function<void(const std::string& pid, const CycleOutcome&)> on_cycle;
    std::function<void(const std::string& pid, const ScheduledAction&, const engine::SubmitResult&)> on_delivered;
};

/// Runs cycles every perception interval on the session's clock until the
/// session ends or `stop` is requested; sleeps between cycles and until each
/// action's deliver_at. Session time comes from `session_now`.
void run_realtime(AgentLoop& loop, const std::function<std::int64_t()>& session_now, std::stop_token stop,
                  const LoopObserver& observer = {});

}  // namespace agora::acp
