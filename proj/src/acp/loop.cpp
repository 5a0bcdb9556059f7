#include "agora/acp/loop.hpp"

#include <chrono>
#include <condition_variable>

namespace agora::acp {

std::string_view to_string(CycleStatus s) {
    switch (s) {
        case CycleStatus::Acted: return "acted";
        case CycleStatus::Waited: return "waited";
        case CycleStatus::TimedOut: return "timed_out";
        case CycleStatus::RetriesExhausted: return "retries_exhausted";
        case CycleStatus::SessionOver: return "session_over";
    }
    return "waited";
}

MonotonicClock steady_clock_ms() {
    return [] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    };
}

AgentLoop::AgentLoop(AgentContext ctx, AgentStepper& stepper, engine::Session& session, MonotonicClock monotonic,
                     int retry_limit)
    : ctx_(std::move(ctx)), stepper_(stepper), session_(session), monotonic_(std::move(monotonic)),
      retry_limit_(retry_limit) {}

CycleOutcome AgentLoop::run_cycle(std::int64_t now) {
    CycleOutcome out;
    auto snap = session_.snapshot();
    if (snap->phase != engine::Phase::Live || now >= snap->session_end()) {
        out.status = CycleStatus::SessionOver;
        return out;
    }
    {
        std::lock_guard lock(cursor_mu_);
        out.summary = compose_state_summary(*snap, ctx_, now, cursor_);
    }

    const std::int64_t started = monotonic_();
    const std::int64_t budget = ctx_.perception_interval.ms;
    std::vector<ValidationError> feedback;
    std::optional<AgentResponse> accepted;
    // one first attempt plus up to retry_limit regenerations
    for (int attempt = 0; attempt <= retry_limit_; ++attempt) {
        const std::int64_t left = budget - (monotonic_() - started);
        if (left <= 0) {
            out.status = CycleStatus::TimedOut;
            return out;
        }
        std::string raw;
        ++out.attempts;
        try {
            raw = stepper_.step(ctx_, out.summary, feedback, Duration{left});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AgentTimeout) throw;
            out.status = CycleStatus::TimedOut;
            return out;
        }
        if (monotonic_() - started > budget) {
            out.status = CycleStatus::TimedOut;  // late answers are dropped, as a wait
            return out;
        }
        auto v = validate_agent_response(raw, ctx_, out.summary.pending_offers);
        if (auto* r = std::get_if<AgentResponse>(&v)) {
            accepted = std::move(*r);
            break;
        }
        feedback = std::get<std::vector<ValidationError>>(v);
        out.feedback.push_back(feedback);
    }
    if (!accepted) {
        out.status = CycleStatus::RetriesExhausted;
        return out;
    }
    // the world may have ended while the agent was thinking
    if (session_.snapshot()->phase != engine::Phase::Live) {
        out.status = CycleStatus::SessionOver;
        return out;
    }
    out.planning = accepted->planning;
    for (auto& a : accepted->actions) {
        ScheduledAction sa;
        sa.decided_at = now;
        sa.deliver_at = session_.schedule_agent_action(ctx_.participant_id, now);
        sa.request = to_engine_request(a, ctx_);
        sa.as_written = a.fields;
        sa.as_written["type"] = a.type;
        out.scheduled.push_back(std::move(sa));
    }
    out.status = out.scheduled.empty() ? CycleStatus::Waited : CycleStatus::Acted;
    return out;
}

std::optional<engine::SubmitResult> AgentLoop::deliver(const ScheduledAction& a) {
    if (session_.snapshot()->phase != engine::Phase::Live) return std::nullopt;
    auto r = session_.submit(a.request);
    if (r.denial) {
        std::string msg = std::string(agora::to_string(r.denial->code));
        if (!r.denial->message.empty()) msg += ": " + r.denial->message;
        std::lock_guard lock(cursor_mu_);
        cursor_.unreported_failures.push_back({a.as_written, msg});
    }
    return r;
}

void run_realtime(AgentLoop& loop, const std::function<std::int64_t()>& session_now, std::stop_token stop,
                  const LoopObserver& observer) {
    std::mutex mu;
    std::condition_variable_any cv;
    // true when the wait ran to `until`, false when stopped
    auto sleep_until = [&](std::int64_t until) {
        std::unique_lock lock(mu);
        const auto left = until - session_now();
        if (left <= 0) return !stop.stop_requested();
        return !cv.wait_for(lock, stop, std::chrono::milliseconds(left), [] { return false; });
    };
    const auto pid = loop.context().participant_id;
    std::int64_t next = session_now();
    while (!stop.stop_requested()) {
        if (!sleep_until(next)) return;
        const auto started = session_now();
        auto outcome = loop.run_cycle(started);
        if (observer.on_cycle) observer.on_cycle(pid, outcome);
        if (outcome.status == CycleStatus::SessionOver) return;
        for (auto& a : outcome.scheduled) {
            if (!sleep_until(a.deliver_at)) return;
            auto r = loop.deliver(a);
            if (!r) return;
            if (observer.on_delivered) observer.on_delivered(pid, a, *r);
        }
        next = started + loop.interval().ms;
    }
}

}  // namespace agora::acp
