#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "agora/acp/loop.hpp"
#include "agora/agents/scripted.hpp"
#include "agora/engine/replay.hpp"

namespace agora::sim {

/// A1..An, all agents in group "default".
std::vector<engine::RosterEntry> agent_roster(int n);

using StepperFactory = std::function<std::unique_ptr<acp::AgentStepper>(const acp::AgentContext&)>;

struct SimulationOptions {
    std::shared_ptr<const ecl::ExperimentConfig> config;
    controls::InteractionControls controls;
    /// Human seats stay idle; every agent seat runs a loop.
    std::vector<engine::RosterEntry> roster;
    std::string session_id = "sim";
    std::uint64_t seed = 1;
    /// Defaults to the Shape Factory script with `script` options.
    StepperFactory stepper;
    agents::ShapeFactoryScriptOptions script;
    /// Spacing of engine ticks that complete production on time.
    Duration tick_every{1000};
};

struct SimulationResult {
    engine::LogHeader header;
    std::vector<engine::CommittedEvent> events;
    engine::SessionState final_state;
    std::map<std::string, std::vector<acp::CycleStatus>> cycles;
};

/// Runs one whole session on a virtual clock. Work is ordered by time, then
/// ticks before deliveries before cycles, then insertion order, so the result
/// is a function of the options alone.
SimulationResult simulate(const SimulationOptions& options);

}  // namespace agora::sim
