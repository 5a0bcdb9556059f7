#pragma once

#include <string>
#include <vector>

#include "agora/engine/engine.hpp"

namespace agora::engine {

/// First line of every event log: everything needed to rebuild the initial state.
struct LogHeader {
    static constexpr std::string_view kFormat = "agora-events/1";
    std::string session_id;
    std::string paradigm;
    /// Canonical ECL text of the compiled config (parameter overrides applied).
    std::string config_ecl;
    std::string config_hash;
    controls::InteractionControls controls;
    std::vector<RosterEntry> roster;
    std::uint64_t seed = 0;
    std::int64_t created_at = 0;
};

LogHeader make_header(const SessionState& initial, std::int64_t created_at);
json header_to_json(const LogHeader& h);
/// Throws Error(CorruptLog).
LogHeader header_from_json(const json& j);

/// Parses the header's config (checking its hash) and instantiates the session.
SessionState initial_state(const LogHeader& h);

struct ReplayResult {
    SessionState state;
    /// Events consumed. Less than the input size only when the log ends inside
    /// a system batch that was never fully written (see allow_partial_tail).
    std::size_t applied = 0;
};

/// Re-executes the log over the initial state: participant events are
/// re-applied as requests, system events by re-running start, tick or end at
/// their timestamp. Every regenerated event must equal the logged one and seq
/// must be gap-free. With allow_partial_tail, a trailing incomplete system
/// batch is left unapplied instead of failing. Throws Error(CorruptLog).
ReplayResult replay(const LogHeader& header, const std::vector<CommittedEvent>& events, bool allow_partial_tail = false);

}  // namespace agora::engine
