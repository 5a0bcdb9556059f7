#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "agora/common/rng.hpp"
#include "agora/engine/engine.hpp"

namespace agora::engine {

/// Durable destination for committed events. append() returns only once the
/// events are durable; throwing means they may not be.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void append(const std::vector<CommittedEvent>& events) = 0;
};

struct SubmitResult {
    std::optional<CommittedEvent> event;
    std::optional<Denial> denial;
    bool committed() const { return event.has_value(); }
};

/// The single-writer commit queue of one session. Every mutation runs under
/// one mutex: compute on a copy, append to the sink, then publish the new
/// snapshot and notify listeners. Readers take snapshots without locking.
/// A sink failure pauses the session: nothing further commits.
class Session {
public:
    using Clock = std::function<std::int64_t()>;
    using Listener = std::function<void(const std::vector<CommittedEvent>&, const std::shared_ptr<const SessionState>&)>;

    /// `clock` is read under the commit lock and clamped to the last event
    /// time, so event timestamps never go backwards.
    Session(SessionState initial, EventSink* sink, Clock clock);

    std::shared_ptr<const SessionState> snapshot() const { return std::atomic_load(&state_); }

    SubmitResult submit(const ActionRequest& req);
    std::vector<CommittedEvent> start();
    std::vector<CommittedEvent> tick();
    std::vector<CommittedEvent> end();

    bool paused() const { return paused_.load(); }
    /// Listeners run under the commit lock, in commit order.
    void subscribe(Listener l);
    void set_fault_hook(FaultHook hook);

    /// deliver_at for an action agent `pid` decided at `now`. Each agent draws
    /// from its own stream derived from the session seed, so the schedule does
    /// not depend on how agent loops interleave.
    std::int64_t schedule_agent_action(const std::string& pid, std::int64_t now);

private:
    std::int64_t now_locked() const;
    void publish(SessionState next, const std::vector<CommittedEvent>& events);

    mutable std::mutex mu_;
    std::shared_ptr<const SessionState> state_;
    EventSink* sink_;
    Clock clock_;
    std::atomic<bool> paused_{false};
    std::vector<Listener> listeners_;
    FaultHook fault_;
    std::map<std::string, SeededStream> latency_;
};

}  // namespace agora::engine
