#include "agora/engine/session.hpp"

namespace agora::engine {

Session::Session(SessionState initial, EventSink* sink, Clock clock)
    : state_(std::make_shared<const SessionState>(std::move(initial))),
      sink_(sink),
      clock_(std::move(clock)) {}

std::int64_t Session::now_locked() const { return std::max(clock_(), state_->now); }

void Session::publish(SessionState next, const std::vector<CommittedEvent>& events) {
    if (!events.empty() && sink_) {
        try {
            sink_->append(events);
        } catch (const std::exception& e) {
            paused_ = true;
            throw Error(ErrorCode::StorageFailure, std::string("event log append failed, session paused: ") + e.what());
        }
    }
    auto snap = std::make_shared<const SessionState>(std::move(next));
    std::atomic_store(&state_, snap);
    if (!events.empty())
        for (auto& l : listeners_) l(events, snap);
}

SubmitResult Session::submit(const ActionRequest& req) {
    std::lock_guard lock(mu_);
    if (paused_) return {std::nullopt, Denial{ErrorCode::StorageFailure, {}, "session is paused"}};
    auto result = apply_action(*state_, req, now_locked(), fault_);
    if (auto* d = std::get_if<Denial>(&result)) return {std::nullopt, *d};
    auto& c = std::get<Commit>(result);
    publish(std::move(c.state), {c.event});
    return {c.event, std::nullopt};
}

std::vector<CommittedEvent> Session::start() {
    std::lock_guard lock(mu_);
    if (paused_) throw Error(ErrorCode::StorageFailure, "session is paused");
    auto t = start_session(*state_, now_locked());
    publish(std::move(t.state), t.events);
    return t.events;
}

std::vector<CommittedEvent> Session::tick() {
    std::lock_guard lock(mu_);
    if (paused_) return {};
    auto t = engine::tick(*state_, now_locked());
    if (t.events.empty()) return {};
    publish(std::move(t.state), t.events);
    return t.events;
}

std::vector<CommittedEvent> Session::end() {
    std::lock_guard lock(mu_);
    if (paused_) throw Error(ErrorCode::StorageFailure, "session is paused");
    auto t = end_session(*state_, now_locked());
    publish(std::move(t.state), t.events);
    return t.events;
}

void Session::subscribe(Listener l) {
    std::lock_guard lock(mu_);
    listeners_.push_back(std::move(l));
}

void Session::set_fault_hook(FaultHook hook) {
    std::lock_guard lock(mu_);
    fault_ = std::move(hook);
}

std::int64_t Session::schedule_agent_action(const std::string& pid, std::int64_t now) {
    std::lock_guard lock(mu_);
    auto it = latency_.find(pid);
    if (it == latency_.end()) it = latency_.emplace(pid, SeededStream::derive(state_->seed, "latency:" + pid)).first;
    return controls::schedule_agent_action(state_->controls, now, it->second);
}

}  // namespace agora::engine
