#include "agora/engine/replay.hpp"

#include "agora/ecl/parser.hpp"
#include "agora/ecl/serializer.hpp"

namespace agora::engine {
namespace {

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptLog, why); }

std::string describe(const CommittedEvent& e) { return "event seq " + std::to_string(e.seq); }

}  // namespace

LogHeader make_header(const SessionState& initial, std::int64_t created_at) {
    LogHeader h;
    h.session_id = initial.session_id;
    h.paradigm = initial.config->paradigm;
    h.config_ecl = ecl::serialize_config(*initial.config);
    h.config_hash = fnv1a64_hex(h.config_ecl);
    h.controls = initial.controls;
    for (auto& p : initial.participants)
        h.roster.push_back(RosterEntry{p.participant_id, p.kind, p.display_name, p.group, p.role, p.persona_profile});
    h.seed = initial.seed;
    h.created_at = created_at;
    return h;
}

json header_to_json(const LogHeader& h) {
    json roster = json::array();
    for (auto& r : h.roster) roster.push_back(roster_entry_to_json(r));
    return {{"format", LogHeader::kFormat},
            {"session_id", h.session_id},
            {"paradigm", h.paradigm},
            {"config_ecl", h.config_ecl},
            {"config_hash", h.config_hash},
            {"controls", controls::controls_to_json(h.controls)},
            {"roster", roster},
            {"seed", h.seed},
            {"created_at", h.created_at}};
}

LogHeader header_from_json(const json& j) {
    try {
        if (!j.is_object() || j.value("format", "") != LogHeader::kFormat) corrupt("not an event log header");
        LogHeader h;
        h.session_id = j.at("session_id").get<std::string>();
        h.paradigm = j.value("paradigm", "");
        h.config_ecl = j.at("config_ecl").get<std::string>();
        h.config_hash = j.at("config_hash").get<std::string>();
        h.controls = controls::controls_from_json(j.at("controls"));
        for (auto& r : j.at("roster")) h.roster.push_back(roster_entry_from_json(r));
        h.seed = j.at("seed").get<std::uint64_t>();
        h.created_at = j.value("created_at", std::int64_t{0});
        return h;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::CorruptLog) throw;
        corrupt(std::string("bad header: ") + e.what());
    } catch (const json::exception& e) {
        corrupt(std::string("bad header: ") + e.what());
    }
}

SessionState initial_state(const LogHeader& h) {
    if (fnv1a64_hex(h.config_ecl) != h.config_hash) corrupt("config hash mismatch");
    auto parsed = ecl::parse_config(h.config_ecl);
    if (!parsed.ok()) corrupt("header config does not compile");
    auto config = std::make_shared<const ecl::ExperimentConfig>(std::move(*parsed.config));
    return instantiate_session(config, h.controls, h.roster, h.session_id, h.seed);
}

ReplayResult replay(const LogHeader& header, const std::vector<CommittedEvent>& events, bool allow_partial_tail) {
    ReplayResult r{initial_state(header), 0};
    SessionState& s = r.state;
    std::size_t i = 0;
    while (i < events.size()) {
        const auto& e = events[i];
        if (e.seq != s.next_seq) corrupt(describe(e) + " breaks the sequence (expected " + std::to_string(s.next_seq) + ")");
        if (e.ts < s.now) corrupt(describe(e) + " goes back in time");
        if (!e.is_system()) {
            ActionRequest req{e.actor, e.action.value("type", ""), e.action};
            req.args.erase("type");
            auto result = apply_action(s, req, e.ts);
            if (auto* d = std::get_if<Denial>(&result))
                corrupt(describe(e) + " is denied on replay: " + std::string(to_string(d->code)) + " " + d->message);
            auto& c = std::get<Commit>(result);
            if (c.event != e) corrupt(describe(e) + " differs on replay");
            s = std::move(c.state);
            ++i;
            ++r.applied;
            continue;
        }
        Transition t;
        try {
            if (e.cause == "start") t = start_session(s, e.ts);
            else if (e.cause == "tick") t = tick(s, e.ts);
            else if (e.cause == "command") t = end_session(s, e.ts);
            else corrupt(describe(e) + " has unknown cause '" + e.cause + "'");
        } catch (const Error& err) {
            if (err.code() == ErrorCode::CorruptLog) throw;
            corrupt(describe(e) + " cannot be regenerated: " + err.what());
        }
        if (t.events.empty()) corrupt(describe(e) + " is not produced on replay");
        const std::size_t available = events.size() - i;
        const std::size_t n = std::min(available, t.events.size());
        for (std::size_t k = 0; k < n; ++k)
            if (t.events[k] != events[i + k]) corrupt(describe(events[i + k]) + " differs on replay");
        if (n < t.events.size()) {
            if (!allow_partial_tail) corrupt("log ends inside the batch starting at " + describe(e));
            return r;  // the incomplete batch was never acknowledged
        }
        s = std::move(t.state);
        i += n;
        r.applied += n;
    }
    return r;
}

}  // namespace agora::engine
