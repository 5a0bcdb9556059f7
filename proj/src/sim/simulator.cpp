#include "agora/sim/simulator.hpp"

#include <queue>
#include <tuple>

namespace agora::sim {

std::vector<engine::RosterEntry> agent_roster(int n) {
    std::vector<engine::RosterEntry> r;
    for (int i = 1; i <= n; ++i) {
        auto id = "A" + std::to_string(i);
        r.push_back({id, ParticipantKind::Agent, id});
    }
    return r;
}

namespace {

class MemorySink : public engine::EventSink {
public:
    void append(const std::vector<engine::CommittedEvent>& events) override {
        log.insert(log.end(), events.begin(), events.end());
    }
    std::vector<engine::CommittedEvent> log;
};

enum class Kind { Tick = 0, Deliver = 1, Cycle = 2 };

struct Work {
    std::int64_t at = 0;
    Kind kind = Kind::Tick;
    std::uint64_t order = 0;
    std::size_t agent = 0;
    acp::ScheduledAction action;

    bool operator>(const Work& o) const {
        return std::tie(at, kind, order) > std::tie(o.at, o.kind, o.order);
    }
};

}  // namespace

SimulationResult simulate(const SimulationOptions& o) {
    auto initial = engine::instantiate_session(o.config, o.controls, o.roster, o.session_id, o.seed);
    SimulationResult out;
    out.header = engine::make_header(initial, 0);

    std::int64_t now = 0;
    MemorySink sink;
    engine::Session session(std::move(initial), &sink, [&now] { return now; });
    session.start();
    const auto end = session.snapshot()->session_end();

    const auto script = agents::shape_factory_script(o.script);
    std::vector<std::unique_ptr<acp::AgentStepper>> steppers;
    std::vector<std::unique_ptr<acp::AgentLoop>> loops;
    const acp::MonotonicClock frozen = [] { return std::int64_t{0}; };  // virtual time never overruns a budget
    for (auto& r : o.roster) {
        if (r.kind != ParticipantKind::Agent) continue;
        auto ctx = acp::build_agent_context(*session.snapshot(), r.participant_id);
        steppers.push_back(o.stepper ? o.stepper(ctx) : std::make_unique<agents::ScriptedStepper>(script));
        loops.push_back(std::make_unique<acp::AgentLoop>(std::move(ctx), *steppers.back(), session, frozen));
    }

    std::priority_queue<Work, std::vector<Work>, std::greater<>> queue;
    std::uint64_t order = 0;
    for (std::size_t i = 0; i < loops.size(); ++i) queue.push({0, Kind::Cycle, order++, i, {}});
    for (std::int64_t t = o.tick_every.ms; t < end; t += o.tick_every.ms) queue.push({t, Kind::Tick, order++, 0, {}});

    while (!queue.empty()) {
        auto w = queue.top();
        queue.pop();
        if (w.at >= end) break;
        now = w.at;
        session.tick();
        if (session.snapshot()->phase != engine::Phase::Live) break;
        auto& loop = *loops[w.agent];
        switch (w.kind) {
            case Kind::Tick:
                break;
            case Kind::Deliver:
                loop.deliver(w.action);
                break;
            case Kind::Cycle: {
                auto outcome = loop.run_cycle(now);
                out.cycles[loop.context().participant_id].push_back(outcome.status);
                for (auto& a : outcome.scheduled) queue.push({a.deliver_at, Kind::Deliver, order++, w.agent, a});
                queue.push({now + loop.interval().ms, Kind::Cycle, order++, w.agent, {}});
                break;
            }
        }
    }
    now = std::max(now, end);
    session.tick();
    if (session.snapshot()->phase == engine::Phase::Live) session.end();

    out.events = std::move(sink.log);
    out.final_state = *session.snapshot();
    return out;
}

}  // namespace agora::sim
