#include "agora/service/service.hpp"

#include <chrono>
#include <cstdlib>
#include <regex>

#include "agora/analysis/metrics.hpp"
#include "agora/ecl/parser.hpp"
#include "agora/ecl/serializer.hpp"
#include "agora/ecl/validator.hpp"
#include "agora/engine/visibility.hpp"

namespace agora::service {

namespace fs = std::filesystem;

// ---- Channel ----

void Channel::push(std::string_view type, json payload) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        queue_.push_back({{"v", kRealtimeVersion}, {"type", type}, {"n", ++n_}, {"payload", std::move(payload)}});
    }
    cv_.notify_all();
}

std::optional<json> Channel::next(std::chrono::milliseconds wait) {
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, wait, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    auto j = std::move(queue_.front());
    queue_.pop_front();
    return j;
}

void Channel::close(std::string_view reason) {
    {
        std::lock_guard lock(mu_);
        if (closed_) return;
        queue_.push_back({{"v", kRealtimeVersion}, {"type", "closed"}, {"n", ++n_}, {"payload", {{"reason", reason}}}});
        closed_ = true;
    }
    cv_.notify_all();
}

bool Channel::closed() const {
    std::lock_guard lock(mu_);
    return closed_;
}

std::vector<json> Channel::drain() {
    std::lock_guard lock(mu_);
    std::vector<json> out(queue_.begin(), queue_.end());
    queue_.clear();
    return out;
}

// ---- options and requests ----

ServiceOptions ServiceOptions::from_env(fs::path asset_dir) {
    ServiceOptions o;
    o.asset_dir = std::move(asset_dir);
    if (const char* d = std::getenv("AGORA_DATA_DIR"); d && *d) o.data_dir = d;
    if (const char* t = std::getenv("AGORA_RESEARCHER_TOKEN"); t && *t) o.researcher_token = t;
    o.endpoint = agents::CompletionEndpointConfig::from_env();
    if (const char* k = std::getenv(o.endpoint.api_key_env.c_str()); k && *k) o.agent_mode = AgentMode::Llm;
    return o;
}

CreateSessionRequest create_request_from_json(const json& j, const json& personas) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "session request must be a JSON object");
    CreateSessionRequest r;
    r.template_id = j.value("template", "");
    r.config_ecl = j.value("config_ecl", "");
    r.controls = j.value("controls", json());
    r.parameters = j.value("parameters", json::object());
    if (!r.parameters.is_object()) throw Error(ErrorCode::InvalidConfig, "parameters must be an object");
    if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
    r.require_all_humans = j.value("require_all_humans", true);
    for (auto e : j.value("roster", json::array())) {
        if (e.is_object() && e.contains("persona_profile") && e["persona_profile"].is_object())
            e["persona_profile"] = e["persona_profile"].dump();
        if (e.is_object() && e.contains("persona") && e["persona"].is_string()) {
            bool found = false;
            for (auto& p : personas)
                if (p.value("personality_name", "") == e["persona"].get<std::string>()) {
                    e["persona_profile"] = p.dump();
                    found = true;
                }
            if (!found) throw Error(ErrorCode::RosterMismatch, "no bundled persona " + e["persona"].get<std::string>());
        }
        r.roster.push_back(engine::roster_entry_from_json(e));
    }
    return r;
}

std::vector<std::string> action_counterparts(const engine::SessionState& s, const engine::ActionRequest& r) {
    std::vector<std::string> out;
    if (r.type == "message") {
        auto rec = r.args.value("recipients", json::array());
        if (rec.empty()) {
            const auto* me = s.find(r.actor);
            for (auto& p : s.participants)
                if (me && p.participant_id != r.actor && p.group == me->group) out.push_back(p.participant_id);
        } else {
            for (auto& x : rec) out.push_back(x.get<std::string>());
        }
    } else if (r.type == "propose_trade_offer") {
        out.push_back(r.args.value("target", ""));
    } else if (r.type == "trade_response" || r.type == "cancel_trade_offer") {
        const auto tid = r.args.value("transaction_id", "");
        for (auto& o : s.offers)
            if (o.transaction_id == tid) out.push_back(o.proposer == r.actor ? o.target : o.proposer);
    }
    return out;
}

// ---- runtime ----

struct SessionService::Runtime {
    RegistryEntry entry;
    std::unique_ptr<FileEventLog> log;
    std::unique_ptr<engine::Session> session;

    std::mutex mu;  // everything below
    std::set<std::string> joined;
    std::map<std::string, std::shared_ptr<Channel>> channels;
    std::vector<std::shared_ptr<Channel>> monitors;
    std::vector<engine::CommittedEvent> events;
    std::int64_t last_timer_push = 0;
    bool ended_notified = false;
    bool storage_alerted = false;

    std::mutex agents_mu;
    std::vector<std::unique_ptr<acp::AgentStepper>> steppers;
    std::vector<std::unique_ptr<acp::AgentLoop>> loops;
    std::vector<std::jthread> threads;
    bool finalized = false;
};

namespace {

std::int64_t wall_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

json aggregate(const engine::SessionState& s, std::int64_t now) {
    std::map<std::string, std::int64_t> trades, messages;
    for (auto& o : s.offers)
        if (o.status == engine::OfferStatus::Accepted) {
            ++trades[o.proposer];
            ++trades[o.target];
        }
    for (auto& m : s.messages) ++messages[m.sender];
    json rows = json::array();
    for (auto& p : s.participants) {
        std::int64_t shapes = 0;
        for (auto& [shape, n] : p.inventory) shapes += n;
        rows.push_back({{"participant_id", p.participant_id},
                        {"kind", to_string(p.kind)},
                        {"wealth", to_dollars(p.wealth)},
                        {"shapes_held", shapes},
                        {"trades", trades[p.participant_id]},
                        {"messages", messages[p.participant_id]},
                        {"orders_fulfilled", p.orders_fulfilled}});
    }
    return {{"phase", to_string(s.phase)}, {"now_ms", now}, {"remaining_ms", s.remaining_at(now)}, {"participants", rows}};
}

json view_of(const engine::SessionState& s, const std::string& pid) {
    const auto* p = s.find(pid);
    bool same_group = false;
    for (auto& q : s.participants) same_group |= q.participant_id != pid && q.group == p->group;
    auto spec = engine::visible_spec(*s.config, s.controls, engine::viewer_of(*p), same_group);
    const auto& flow = s.controls.information_flow;
    const auto limits = controls::effective_price_limits(s.controls, s.config->parameters);
    return {{"selectors", spec},
            {"chat_mode", controls::to_string(flow.chat_mode)},
            {"turn_taking", flow.turn_taking},
            {"typing_indicator", s.controls.agent_responsiveness.typing_indicator},
            {"price_limits",
             {{"min", to_dollars(limits.min)}, {"max", to_dollars(limits.max)}}}};
}

}  // namespace

SessionService::SessionService(ServiceOptions options) : options_(std::move(options)), registry_(options_.data_dir) {
    if (!options_.clock) options_.clock = wall_ms;
    const auto persona_file = options_.asset_dir / "personas" / "default.json";
    personas_ = fs::exists(persona_file) ? json::parse(read_file(persona_file)) : json::array();
    recover();
    if (options_.timer_period.ms > 0)
        timer_ = std::jthread([this](std::stop_token stop) {
            std::mutex m;
            std::condition_variable_any cv;
            while (!stop.stop_requested()) {
                tick_all();
                std::unique_lock lock(m);
                cv.wait_for(lock, stop, std::chrono::milliseconds(options_.timer_period.ms), [] { return false; });
            }
        });
}

SessionService::~SessionService() {
    if (timer_.joinable()) {
        timer_.request_stop();
        timer_.join();
    }
    std::map<std::string, std::shared_ptr<Runtime>> all;
    {
        std::lock_guard lock(mu_);
        all = sessions_;
    }
    for (auto& [id, rt] : all) {
        std::lock_guard lock(rt->agents_mu);
        for (auto& t : rt->threads) t.request_stop();
        rt->threads.clear();
    }
}

bool SessionService::researcher_authorized(std::string_view token) const {
    return !options_.researcher_token.empty() && token == options_.researcher_token;
}

fs::path SessionService::log_path(const std::string& id) const { return options_.data_dir / "sessions" / id / "events.jsonl"; }

std::shared_ptr<SessionService::Runtime> SessionService::runtime(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "no session " + id);
    return it->second;
}

std::shared_ptr<const engine::SessionState> SessionService::snapshot(const std::string& id) const {
    return runtime(id)->session->snapshot();
}

void SessionService::set_log_fault(const std::string& id, std::function<void()> fault) {
    runtime(id)->log->set_fault(std::move(fault));
}

// ---- templates and presets ----

std::string SessionService::template_text(const std::string& id) const {
    for (auto dir : {options_.data_dir / "templates", options_.asset_dir / "paradigms"}) {
        auto p = dir / (id + ".ecl");
        if (fs::exists(p)) return read_file(p);
    }
    throw Error(ErrorCode::InvalidConfig, "no paradigm template " + id);
}

json SessionService::list_paradigms() const {
    json out = json::array();
    std::set<std::string> seen;
    for (auto [dir, source] : {std::pair{options_.data_dir / "templates", "uploaded"},
                               std::pair{options_.asset_dir / "paradigms", "bundled"}}) {
        if (!fs::exists(dir)) continue;
        std::vector<fs::path> files;
        for (auto& f : fs::directory_iterator(dir))
            if (f.path().extension() == ".ecl") files.push_back(f.path());
        std::sort(files.begin(), files.end());
        for (auto& f : files) {
            const auto id = f.stem().string();
            if (!seen.insert(id).second) continue;
            auto parsed = ecl::parse_config(read_file(f));
            if (!parsed.ok()) continue;
            const auto& c = *parsed.config;
            json params = json::object();
            for (auto& e : c.parameters.entries) params[e.name] = ecl::serialize_literal(e.value);
            out.push_back({{"template_id", id},
                           {"source", source},
                           {"paradigm", c.paradigm},
                           {"title", c.title},
                           {"description", c.description},
                           {"parameters", params},
                           {"actions", [&] {
                                json a = json::array();
                                for (auto& x : c.actions) a.push_back(x.name);
                                return a;
                            }()}});
        }
    }
    return out;
}

json SessionService::upload_template(const std::string& text, const std::string& requested_id) {
    auto parsed = ecl::parse_config(text);
    if (!parsed.ok())
        throw RequestError(ErrorCode::InvalidConfig, "template does not compile",
                           {{"diagnostics", ecl::diagnostics_to_json(parsed.diagnostics)}});
    auto report = ecl::validate_config(*parsed.config);
    if (!report.valid())
        throw RequestError(ErrorCode::InvalidConfig, "template has configuration conflicts", {{"report", report.to_json()}});
    const auto id = requested_id.empty() ? parsed.config->paradigm : requested_id;
    static const std::regex ok_id("^[a-z][a-z0-9_]{0,63}$");
    if (!std::regex_match(id, ok_id)) throw Error(ErrorCode::InvalidConfig, "template id must match [a-z][a-z0-9_]*");
    if (fs::exists(options_.asset_dir / "paradigms" / (id + ".ecl")))
        throw Error(ErrorCode::InvalidConfig, "template id " + id + " is a bundled paradigm");
    std::error_code ec;
    fs::create_directories(options_.data_dir / "templates", ec);
    atomic_write_file(options_.data_dir / "templates" / (id + ".ecl"), text);
    return {{"template_id", id}, {"paradigm", parsed.config->paradigm}, {"report", report.to_json()}};
}

json SessionService::list_controls_presets() const {
    json out = json::object();
    const auto dir = options_.asset_dir / "controls";
    if (!fs::exists(dir)) return out;
    for (auto& f : fs::directory_iterator(dir))
        if (f.path().extension() == ".json")
            out[f.path().stem().string()] = controls::controls_to_json(controls::load_controls_file(f.path().string()));
    return out;
}

// ---- sessions ----

std::string SessionService::create_session(const CreateSessionRequest& req) {
    // config: template or inline text, then parameter overrides
    const std::string text = !req.config_ecl.empty() ? req.config_ecl
                             : template_text(req.template_id.empty() ? "shape_factory" : req.template_id);
    auto parsed = ecl::parse_config(text);
    if (!parsed.ok())
        throw RequestError(ErrorCode::InvalidConfig, "config does not compile",
                           {{"diagnostics", ecl::diagnostics_to_json(parsed.diagnostics)}});
    auto cfg = std::move(*parsed.config);
    for (auto& [name, v] : req.parameters.items()) {
        const auto* current = cfg.parameters.find(name);
        if (!current) throw Error(ErrorCode::InvalidConfig, "unknown parameter " + name);
        TypeSpec type;
        if (auto k = ecl::known_parameter_type(name)) type = TypeSpec::of(*k);
        else
            type = TypeSpec::of(std::visit(
                [](auto&& x) -> TypeKind {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, std::int64_t>) return TypeKind::Integer;
                    else if constexpr (std::is_same_v<T, double>) return TypeKind::Decimal;
                    else if constexpr (std::is_same_v<T, bool>) return TypeKind::Boolean;
                    else if constexpr (std::is_same_v<T, Money>) return TypeKind::Money;
                    else if constexpr (std::is_same_v<T, Duration>) return TypeKind::Duration;
                    else return TypeKind::String;
                },
                *current));
        std::string literal = v.is_string() ? v.get<std::string>() : v.dump();
        if (v.is_number() && type.kind == TypeKind::Money) literal = "$" + literal;
        if (v.is_number() && type.kind == TypeKind::Duration) literal += "s";
        try {
            cfg.parameters.set(name, ecl::parse_literal(literal, type));
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidConfig, "parameter " + name + ": " + e.detail());
        }
    }
    auto report = ecl::validate_config(cfg);
    if (!report.valid())
        throw RequestError(ErrorCode::InvalidConfig, "config has configuration conflicts", {{"report", report.to_json()}});
    // canonical form, so the log header reproduces this exact config
    auto config = std::make_shared<const ecl::ExperimentConfig>(ecl::compile_or_throw(ecl::serialize_config(cfg)));

    controls::InteractionControls c;
    if (req.controls.is_string()) {
        const auto p = options_.asset_dir / "controls" / (req.controls.get<std::string>() + ".json");
        if (!fs::exists(p)) throw Error(ErrorCode::InvalidControls, "no controls preset " + req.controls.get<std::string>());
        c = controls::load_controls_file(p.string());
    } else if (req.controls.is_object()) {
        c = controls::controls_from_json(req.controls);
    }

    auto roster = req.roster;
    if (roster.empty()) {
        const auto n = config->parameters.participant_count();
        for (std::int64_t i = 0; i < n; ++i) {
            engine::RosterEntry r;
            r.participant_id = i == 0 ? "H1" : "A" + std::to_string(i);
            r.kind = i == 0 ? ParticipantKind::Human : ParticipantKind::Agent;
            r.display_name = r.participant_id;
            roster.push_back(r);
        }
    }
    std::size_t persona = 0;
    for (auto& r : roster)
        if (r.kind == ParticipantKind::Agent && !r.persona_profile && !personas_.empty())
            r.persona_profile = personas_[persona++ % personas_.size()].dump();

    std::lock_guard create_lock(create_mu_);
    const auto id = registry_.allocate_id();
    const auto seed = req.seed.value_or(static_cast<std::uint64_t>(now()) ^ std::stoull(id));
    auto state = engine::instantiate_session(config, c, roster, id, seed);
    const auto created = now();
    auto header = engine::make_header(state, created);
    auto log = FileEventLog::create(log_path(id), header);

    RegistryEntry entry;
    entry.session_id = id;
    entry.paradigm = config->paradigm;
    entry.template_id = req.config_ecl.empty() ? (req.template_id.empty() ? "shape_factory" : req.template_id) : "";
    entry.config_hash = header.config_hash;
    entry.controls = controls::controls_to_json(c);
    entry.roster = roster;
    entry.created_at = created;
    entry.seed = seed;
    entry.require_all_humans = req.require_all_humans;
    registry_.put(entry);
    open_runtime(entry, std::move(state), std::move(log), {});
    return id;
}

std::shared_ptr<SessionService::Runtime> SessionService::open_runtime(RegistryEntry entry, engine::SessionState state,
                                                                      std::unique_ptr<FileEventLog> log,
                                                                      std::vector<engine::CommittedEvent> events) {
    auto rt = std::make_shared<Runtime>();
    rt->entry = std::move(entry);
    rt->log = std::move(log);
    rt->events = std::move(events);
    rt->session = std::make_unique<engine::Session>(std::move(state), rt->log.get(), [this] { return now(); });
    Runtime* raw = rt.get();
    const std::string id = rt->entry.session_id;
    rt->session->subscribe([raw, id](const std::vector<engine::CommittedEvent>& events,
                                     const std::shared_ptr<const engine::SessionState>& snap) {
        std::lock_guard lock(raw->mu);
        raw->events.insert(raw->events.end(), events.begin(), events.end());
        for (auto& m : raw->monitors)
            for (auto& e : events) m->push("event", engine::event_to_json(e));
        json seqs = json::array();
        for (auto& e : events) seqs.push_back(e.seq);
        const auto ts = events.back().ts;
        for (auto& [pid, ch] : raw->channels)
            ch->push("update", {{"seqs", seqs}, {"ts", ts}, {"state", engine::filter_visible_state(*snap, pid, ts)}});
        if (snap->phase == engine::Phase::Ended && !raw->ended_notified) {
            raw->ended_notified = true;
            const json done = {{"session_id", id}, {"results", "/api/sessions/" + id + "/report"}};
            for (auto& [pid, ch] : raw->channels) {
                ch->push("session_ended", done);
                ch->close("session ended");
            }
            for (auto& m : raw->monitors) {
                m->push("aggregate", aggregate(*snap, ts));
                m->push("session_ended", done);
                m->close("session ended");
            }
            raw->channels.clear();
            raw->monitors.clear();
        }
    });
    {
        std::lock_guard lock(mu_);
        sessions_[id] = rt;
    }
    return rt;
}

void SessionService::recover() {
    for (auto& entry : registry_.list()) {
        const auto path = log_path(entry.session_id);
        if (!fs::exists(path)) continue;  // allocated but never written
        auto rec = recover_log(path);
        const auto last_seq = rec.events.empty() ? 0 : rec.events.back().seq;
        const auto last_ts = rec.events.empty() ? 0 : rec.events.back().ts;
        entry.phase = std::string(to_string(rec.state.phase));
        registry_.put(entry);
        auto rt = open_runtime(entry, std::move(rec.state), FileEventLog::reopen(path, last_seq, last_ts),
                               std::move(rec.events));
        if (rt->session->snapshot()->phase == engine::Phase::Live) launch_agents(*rt);
    }
}

json SessionService::list_sessions() const {
    json out = json::array();
    for (auto& e : registry_.list()) out.push_back(entry_to_json(e));
    return out;
}

json SessionService::session_info(const std::string& id) const {
    auto rt = runtime(id);
    auto snap = rt->session->snapshot();
    json info = entry_to_json(rt->entry);
    info["phase"] = to_string(snap->phase);
    info["now_ms"] = now();
    info["remaining_ms"] = snap->phase == engine::Phase::Live ? snap->remaining_at(now()) : 0;
    info["paused"] = rt->session->paused();
    std::lock_guard lock(rt->mu);
    info["joined"] = rt->joined;
    info["events"] = rt->events.size();
    return info;
}

JoinResult SessionService::join(const std::string& id, const std::string& pid) {
    auto rt = runtime(id);
    auto snap = rt->session->snapshot();
    const auto* p = snap->find(pid);
    if (!p) throw Error(ErrorCode::UnknownParticipant, "no participant " + pid + " in session " + id);
    if (p->kind != ParticipantKind::Human) throw Error(ErrorCode::SeatTaken, "seat " + pid + " is held by an agent");
    if (snap->phase == engine::Phase::Ended)
        throw Error(ErrorCode::SessionEnded, "session " + id + " has ended; results at /api/sessions/" + id + "/report");
    auto ch = std::make_shared<Channel>();
    std::lock_guard lock(rt->mu);
    snap = rt->session->snapshot();  // anything committed before this point is in the snapshot
    if (auto it = rt->channels.find(pid); it != rt->channels.end()) it->second->close("superseded by a new connection");
    rt->channels[pid] = ch;
    rt->joined.insert(pid);
    const auto t = std::max(snap->now, snap->phase == engine::Phase::Live ? now() : snap->now);
    json initial = {{"session_id", id},
                    {"participant_id", pid},
                    {"phase", to_string(snap->phase)},
                    {"last_seq", snap->next_seq - 1},
                    {"state", engine::filter_visible_state(*snap, pid, t)},
                    {"view", view_of(*snap, pid)}};
    ch->push("snapshot", initial);
    return {ch, initial};
}

json SessionService::start(const std::string& id, bool force) {
    auto rt = runtime(id);
    auto snap = rt->session->snapshot();
    if (snap->phase != engine::Phase::Created) throw Error(ErrorCode::WrongPhase, "session " + id + " is not in phase created");
    if (rt->entry.require_all_humans && !force) {
        std::vector<std::string> missing;
        {
            std::lock_guard lock(rt->mu);
            for (auto& p : snap->participants)
                if (p.kind == ParticipantKind::Human && !rt->joined.count(p.participant_id)) missing.push_back(p.participant_id);
        }
        if (!missing.empty())
            throw RequestError(ErrorCode::SeatsNotJoined, "human seats not joined", {{"missing", missing}});
    }
    std::vector<engine::CommittedEvent> events;
    try {
        events = rt->session->start();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageFailure) alert_storage(*rt, e.detail());
        throw;
    }
    rt->entry.phase = "live";
    registry_.put(rt->entry);
    launch_agents(*rt);
    return {{"session_id", id}, {"phase", "live"}, {"started_at", rt->session->snapshot()->started_at}};
}

json SessionService::end(const std::string& id) {
    auto rt = runtime(id);
    try {
        rt->session->end();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageFailure) alert_storage(*rt, e.detail());
        throw;
    }
    finalize(*rt);
    return {{"session_id", id}, {"phase", "ended"}};
}

engine::SubmitResult SessionService::submit(const std::string& id, const std::string& pid, const std::string& type,
                                            json args) {
    auto rt = runtime(id);
    auto snap = rt->session->snapshot();
    const auto* p = snap->find(pid);
    if (!p) throw Error(ErrorCode::UnknownParticipant, "no participant " + pid);
    if (p->kind != ParticipantKind::Human) throw Error(ErrorCode::SeatTaken, "seat " + pid + " is held by an agent");
    try {
        auto r = rt->session->submit({pid, type, std::move(args)});
        if (r.denial && r.denial->code == ErrorCode::StorageFailure) alert_storage(*rt, r.denial->message);
        return r;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageFailure) alert_storage(*rt, e.detail());
        throw;
    }
}

void SessionService::alert_storage(Runtime& rt, const std::string& what) {
    std::lock_guard lock(rt.mu);
    if (rt.storage_alerted) return;
    rt.storage_alerted = true;
    const json alert = {{"code", "StorageFailure"}, {"message", what}, {"session_id", rt.entry.session_id}};
    for (auto& m : rt.monitors) m->push("alert", alert);
    for (auto& [pid, ch] : rt.channels) ch->push("paused", {{"reason", "storage failure"}});
}

std::shared_ptr<Channel> SessionService::monitor(const std::string& id) {
    auto rt = runtime(id);
    auto ch = std::make_shared<Channel>();
    std::lock_guard lock(rt->mu);
    auto snap = rt->session->snapshot();
    for (auto& e : rt->events) ch->push("event", engine::event_to_json(e));
    ch->push("aggregate", aggregate(*snap, std::max(snap->now, now())));
    if (snap->phase == engine::Phase::Ended) {
        ch->push("session_ended", {{"session_id", id}, {"results", "/api/sessions/" + id + "/report"}});
        ch->close("session ended");
    } else {
        rt->monitors.push_back(ch);
    }
    return ch;
}

std::string SessionService::export_raw(const std::string& id) const {
    runtime(id);
    return read_file(log_path(id));
}

std::string SessionService::export_flattened(const std::string& id) const {
    runtime(id);
    auto log = read_log(log_path(id));
    return analysis::rows_to_csv(analysis::flatten(log.header, log.events));
}

json SessionService::report(const std::string& id, const std::optional<std::string>& participant) const {
    runtime(id);
    auto log = read_log(log_path(id));
    return analysis::summarize_session(log.header, log.events, participant);
}

void SessionService::tick_all() {
    std::vector<std::shared_ptr<Runtime>> all;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, rt] : sessions_) all.push_back(rt);
    }
    for (auto& rt : all) {
        auto snap = rt->session->snapshot();
        if (snap->phase == engine::Phase::Live && !rt->session->paused()) {
            try {
                rt->session->tick();
            } catch (const Error& e) {
                if (e.code() == ErrorCode::StorageFailure) alert_storage(*rt, e.detail());
            }
            snap = rt->session->snapshot();
            const auto t = std::max(now(), snap->now);
            std::lock_guard lock(rt->mu);
            if (snap->phase == engine::Phase::Live && t - rt->last_timer_push >= 1000) {
                rt->last_timer_push = t;
                const json timer = {{"now_ms", t}, {"remaining_ms", snap->remaining_at(t)}};
                for (auto& [pid, ch] : rt->channels) ch->push("timer", timer);
                for (auto& m : rt->monitors) m->push("aggregate", aggregate(*snap, t));
            }
        }
        if (snap->phase == engine::Phase::Ended) finalize(*rt);
    }
}

void SessionService::finalize(Runtime& rt) {
    {
        std::lock_guard lock(rt.agents_mu);
        if (rt.finalized) return;
        rt.finalized = true;
        for (auto& t : rt.threads) t.request_stop();
        rt.threads.clear();  // joins
    }
    rt.entry.phase = "ended";
    registry_.put(rt.entry);
}

void SessionService::launch_agents(Runtime& rt) {
    if (!options_.run_agents) return;
    std::lock_guard lock(rt.agents_mu);
    if (!rt.threads.empty() || rt.finalized) return;
    auto snap = rt.session->snapshot();
    const bool shape_factory = snap->config->find_action("produce_shape") != nullptr;
    std::optional<agents::PromptTemplate> prompt;
    if (options_.agent_mode == AgentMode::Llm) {
        const auto p = options_.asset_dir / "prompts" / (rt.entry.paradigm + ".txt");
        if (fs::exists(p)) prompt = agents::PromptTemplate::load(p.string());
    }
    Runtime* raw = &rt;
    for (auto& p : snap->participants) {
        if (p.kind != ParticipantKind::Agent) continue;
        auto ctx = acp::build_agent_context(*snap, p.participant_id);
        if (prompt) {
            rt.steppers.push_back(std::make_unique<agents::LlmStepper>(
                options_.endpoint, *prompt, snap->controls, [raw](const agents::Incident& i) {
                    std::lock_guard l(raw->mu);
                    for (auto& m : raw->monitors)
                        m->push("incident", {{"participant_id", i.participant_id},
                                             {"code", to_string(i.code)},
                                             {"attempts", i.attempts},
                                             {"detail", i.detail}});
                }));
        } else {
            rt.steppers.push_back(std::make_unique<agents::ScriptedStepper>(
                shape_factory ? agents::shape_factory_script(options_.script) : agents::AgentScript{}));
        }
        rt.loops.push_back(std::make_unique<acp::AgentLoop>(std::move(ctx), *rt.steppers.back(), *rt.session));
    }
    const bool typing = snap->controls.agent_responsiveness.typing_indicator;
    acp::LoopObserver observer;
    observer.on_cycle = [raw, typing](const std::string& pid, const acp::CycleOutcome& out) {
        if (!typing || out.scheduled.empty()) return;
        auto s = raw->session->snapshot();
        const auto* me = s->find(pid);
        std::lock_guard l(raw->mu);
        for (auto& a : out.scheduled)
            for (auto& who : action_counterparts(*s, a.request))
                if (auto it = raw->channels.find(who); it != raw->channels.end())
                    it->second->push("typing", {{"participant_id", pid},
                                                {"display_name", me ? engine::shown_name(*s, *me) : pid},
                                                {"active", true},
                                                {"until_ms", a.deliver_at}});
    };
    observer.on_delivered = [raw, typing](const std::string& pid, const acp::ScheduledAction& a, const engine::SubmitResult&) {
        if (!typing) return;
        auto s = raw->session->snapshot();
        std::lock_guard l(raw->mu);
        for (auto& who : action_counterparts(*s, a.request))
            if (auto it = raw->channels.find(who); it != raw->channels.end())
                it->second->push("typing", {{"participant_id", pid}, {"active", false}});
    };
    for (auto& loop : rt.loops) {
        acp::AgentLoop* l = loop.get();
        rt.threads.emplace_back([this, raw, l, observer](std::stop_token stop) {
            try {
                acp::run_realtime(*l, [this] { return now(); }, stop, observer);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::StorageFailure) alert_storage(*raw, e.detail());
            } catch (const std::exception&) {
                // a dead agent loop leaves the seat idle; the session goes on
            }
        });
    }
}

}  // namespace agora::service
