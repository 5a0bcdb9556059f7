#include "agora/controls/controls.hpp"

#include <fstream>
#include <set>

#include "agora/common/error.hpp"

namespace agora::controls {
namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidControls, msg); }

template <typename E>
struct EnumName {
    E value;
    const char* name;
};

constexpr EnumName<ChatMode> kChatModes[] = {
    {ChatMode::Private, "private"}, {ChatMode::Group, "group"}, {ChatMode::Disabled, "disabled"}};
constexpr EnumName<Granularity> kGranularities[] = {{Granularity::Exact, "exact"}, {Granularity::Summary, "summary"}};
constexpr EnumName<Negotiation> kNegotiations[] = {{Negotiation::AcceptOrReject, "accept_or_reject"},
                                                   {Negotiation::OpenWithCounteroffers, "open_with_counteroffers"}};
constexpr EnumName<Explanations> kExplanations[] = {
    {Explanations::Proactive, "proactive"}, {Explanations::OnDemand, "on_demand"}, {Explanations::None, "none"}};
constexpr EnumName<Escrow> kEscrows[] = {{Escrow::AtAcceptance, "at_acceptance"}, {Escrow::Strict, "strict"}};

template <typename E, std::size_t N>
E enum_from(const json& j, const EnumName<E> (&table)[N], const std::string& field) {
    if (!j.is_string()) invalid(field + " must be a string");
    auto s = j.get<std::string>();
    for (auto& e : table)
        if (s == e.name) return e.value;
    std::string allowed;
    for (auto& e : table) allowed += (allowed.empty() ? "" : "|") + std::string(e.name);
    invalid(field + " must be one of " + allowed + ", got \"" + s + "\"");
}

template <typename E, std::size_t N>
const char* enum_name(E v, const EnumName<E> (&table)[N]) {
    for (auto& e : table)
        if (e.value == v) return e.name;
    return "?";
}

/// Reads the fields of one layer object, rejecting unknown keys.
class Layer {
public:
    Layer(const json& j, std::string name, std::initializer_list<const char*> keys) : j_(j), name_(std::move(name)) {
        if (!j.is_object()) invalid(name_ + " must be an object");
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (auto& [k, _] : j.items())
            if (!allowed.count(k)) invalid("unknown field " + name_ + "." + k);
    }

    const json* get(const char* key) const {
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return nullptr;
        return &*it;
    }
    std::string path(const char* key) const { return name_ + "." + key; }

    bool boolean(const char* key, bool def) const {
        auto* v = get(key);
        if (!v) return def;
        if (!v->is_boolean()) invalid(path(key) + " must be a boolean");
        return v->get<bool>();
    }
    std::int64_t integer(const char* key, std::int64_t def) const {
        auto* v = get(key);
        if (!v) return def;
        return as_int(*v, path(key));
    }
    static std::int64_t as_int(const json& v, const std::string& path) {
        if (!v.is_number_integer()) invalid(path + " must be an integer");
        return v.get<std::int64_t>();
    }

private:
    const json& j_;
    std::string name_;
};

std::map<std::string, std::string> string_map(const json* j, const std::string& path) {
    std::map<std::string, std::string> out;
    if (!j) return out;
    if (!j->is_object()) invalid(path + " must be an object");
    for (auto& [k, v] : j->items()) {
        if (!v.is_string()) invalid(path + "." + k + " must be a string");
        out[k] = v.get<std::string>();
    }
    return out;
}

}  // namespace

bool DashboardAudience::matches(ParticipantKind viewer_kind, const std::string& viewer_group) const {
    switch (kind) {
        case Kind::All: return true;
        case Kind::Humans: return viewer_kind == ParticipantKind::Human;
        case Kind::Agents: return viewer_kind == ParticipantKind::Agent;
        case Kind::Group: return viewer_group == group;
    }
    return false;
}

std::string_view to_string(ChatMode m) { return enum_name(m, kChatModes); }
std::string_view to_string(Granularity g) { return enum_name(g, kGranularities); }
std::string_view to_string(Negotiation n) { return enum_name(n, kNegotiations); }

InteractionControls controls_from_json(const json& j) {
    if (!j.is_object()) invalid("controls must be a JSON object");
    for (const char* layer : {"information_flow", "action_structure", "social_framing", "agent_responsiveness"})
        if (!j.contains(layer)) invalid("missing control layer " + std::string(layer));
    Layer root(j, "controls", {"information_flow", "action_structure", "social_framing", "agent_responsiveness"});
    InteractionControls c;

    Layer info(j.at("information_flow"), "information_flow",
               {"dashboard_enabled", "dashboard_audience", "dashboard_fields", "update_interval_ms", "granularity",
                "chat_mode", "turn_taking", "turn_timeout_ms", "max_message_length"});
    auto& f = c.information_flow;
    f.dashboard_enabled = info.boolean("dashboard_enabled", f.dashboard_enabled);
    if (auto* a = info.get("dashboard_audience")) {
        if (a->is_string()) {
            auto s = a->get<std::string>();
            if (s == "all") f.dashboard_audience.kind = DashboardAudience::Kind::All;
            else if (s == "humans") f.dashboard_audience.kind = DashboardAudience::Kind::Humans;
            else if (s == "agents") f.dashboard_audience.kind = DashboardAudience::Kind::Agents;
            else invalid("information_flow.dashboard_audience must be all|humans|agents|{\"group\": name}");
        } else if (a->is_object() && a->size() == 1 && a->contains("group") && a->at("group").is_string()) {
            f.dashboard_audience = {DashboardAudience::Kind::Group, a->at("group").get<std::string>()};
        } else {
            invalid("information_flow.dashboard_audience must be all|humans|agents|{\"group\": name}");
        }
    }
    if (auto* fields = info.get("dashboard_fields")) {
        if (!fields->is_array()) invalid("information_flow.dashboard_fields must be an array");
        for (auto& x : *fields) {
            if (!x.is_string()) invalid("information_flow.dashboard_fields entries must be strings");
            f.dashboard_fields.push_back(x.get<std::string>());
        }
    }
    f.update_interval = Duration{info.integer("update_interval_ms", f.update_interval.ms)};
    if (auto* g = info.get("granularity")) f.granularity = enum_from(*g, kGranularities, "information_flow.granularity");
    if (auto* m = info.get("chat_mode")) f.chat_mode = enum_from(*m, kChatModes, "information_flow.chat_mode");
    f.turn_taking = info.boolean("turn_taking", f.turn_taking);
    f.turn_timeout = Duration{info.integer("turn_timeout_ms", f.turn_timeout.ms)};
    if (auto* m = info.get("max_message_length")) f.max_message_length = Layer::as_int(*m, "information_flow.max_message_length");

    Layer act(j.at("action_structure"), "action_structure",
              {"negotiation", "price_limits", "max_trade_frequency", "concurrent_offers_allowed", "escrow"});
    auto& s = c.action_structure;
    if (auto* n = act.get("negotiation")) s.negotiation = enum_from(*n, kNegotiations, "action_structure.negotiation");
    if (auto* p = act.get("price_limits")) {
        Layer pl(*p, "action_structure.price_limits", {"min_cents", "max_cents"});
        if (!pl.get("min_cents") || !pl.get("max_cents")) invalid("action_structure.price_limits needs min_cents and max_cents");
        s.price_limits = PriceLimits{Money{pl.integer("min_cents", 0)}, Money{pl.integer("max_cents", 0)}};
    }
    if (auto* r = act.get("max_trade_frequency")) {
        Layer rl(*r, "action_structure.max_trade_frequency", {"count", "window_ms"});
        if (!rl.get("count") || !rl.get("window_ms")) invalid("action_structure.max_trade_frequency needs count and window_ms");
        s.max_trade_frequency = RateLimit{rl.integer("count", 0), Duration{rl.integer("window_ms", 0)}};
    }
    s.concurrent_offers_allowed = act.boolean("concurrent_offers_allowed", s.concurrent_offers_allowed);
    if (auto* e = act.get("escrow")) s.escrow = enum_from(*e, kEscrows, "action_structure.escrow");

    Layer social(j.at("social_framing"), "social_framing", {"agent_display_names", "persona_visible", "group_cues"});
    c.social_framing.agent_display_names = string_map(social.get("agent_display_names"), "social_framing.agent_display_names");
    c.social_framing.persona_visible = social.boolean("persona_visible", false);
    c.social_framing.group_cues = string_map(social.get("group_cues"), "social_framing.group_cues");

    Layer resp(j.at("agent_responsiveness"), "agent_responsiveness",
               {"latency", "typing_indicator", "adaptive_feedback", "explanations", "perception_interval_ms"});
    auto& r = c.agent_responsiveness;
    if (auto* l = resp.get("latency")) {
        if (!l->is_object() || !l->contains("kind") || !l->at("kind").is_string())
            invalid("agent_responsiveness.latency needs a kind");
        auto kind = l->at("kind").get<std::string>();
        if (kind == "immediate") {
            Layer(*l, "agent_responsiveness.latency", {"kind"});
            r.latency.kind = LatencyKind::Immediate;
        } else if (kind == "fixed") {
            Layer ll(*l, "agent_responsiveness.latency", {"kind", "ms"});
            if (!ll.get("ms")) invalid("fixed latency needs ms");
            r.latency = Latency{LatencyKind::Fixed, Duration{ll.integer("ms", 0)}, {}, {}};
        } else if (kind == "uniform") {
            Layer ll(*l, "agent_responsiveness.latency", {"kind", "min_ms", "max_ms"});
            if (!ll.get("min_ms") || !ll.get("max_ms")) invalid("uniform latency needs min_ms and max_ms");
            r.latency = Latency{LatencyKind::Uniform, {}, Duration{ll.integer("min_ms", 0)}, Duration{ll.integer("max_ms", 0)}};
        } else {
            invalid("agent_responsiveness.latency.kind must be immediate|fixed|uniform");
        }
    }
    r.typing_indicator = resp.boolean("typing_indicator", r.typing_indicator);
    r.adaptive_feedback = resp.boolean("adaptive_feedback", r.adaptive_feedback);
    if (auto* e = resp.get("explanations")) r.explanations = enum_from(*e, kExplanations, "agent_responsiveness.explanations");
    if (auto* p = resp.get("perception_interval_ms"))
        r.perception_interval = Duration{Layer::as_int(*p, "agent_responsiveness.perception_interval_ms")};

    // structural invariants that need no paradigm
    if (f.dashboard_enabled && f.update_interval.ms <= 0) invalid("update_interval_ms must be positive when the dashboard is enabled");
    if (f.turn_timeout.ms <= 0) invalid("turn_timeout_ms must be positive");
    if (f.max_message_length && *f.max_message_length < 1) invalid("max_message_length must be at least 1");
    if (s.max_trade_frequency && (s.max_trade_frequency->count < 1 || s.max_trade_frequency->window.ms <= 0))
        invalid("max_trade_frequency needs count >= 1 and window_ms > 0");
    if (s.price_limits && (s.price_limits->min.cents < 0 || s.price_limits->min > s.price_limits->max))
        invalid("price_limits must satisfy 0 <= min <= max");
    if (r.latency.fixed.ms < 0 || r.latency.min.ms < 0 || r.latency.max.ms < 0) invalid("latency must be >= 0");
    if (r.latency.min > r.latency.max) invalid("uniform latency needs min_ms <= max_ms");
    if (r.perception_interval && r.perception_interval->ms <= 0) invalid("perception_interval_ms must be positive");
    std::set<std::string> names;
    for (auto& [pid, name] : c.social_framing.agent_display_names) {
        if (name.empty()) invalid("display name for " + pid + " is empty");
        if (!names.insert(name).second) invalid("display name \"" + name + "\" is used twice");
    }
    return c;
}

json controls_to_json(const InteractionControls& c) {
    auto& f = c.information_flow;
    json audience;
    switch (f.dashboard_audience.kind) {
        case DashboardAudience::Kind::All: audience = "all"; break;
        case DashboardAudience::Kind::Humans: audience = "humans"; break;
        case DashboardAudience::Kind::Agents: audience = "agents"; break;
        case DashboardAudience::Kind::Group: audience = {{"group", f.dashboard_audience.group}}; break;
    }
    json info = {{"dashboard_enabled", f.dashboard_enabled},
                 {"dashboard_audience", audience},
                 {"dashboard_fields", f.dashboard_fields},
                 {"update_interval_ms", f.update_interval.ms},
                 {"granularity", enum_name(f.granularity, kGranularities)},
                 {"chat_mode", enum_name(f.chat_mode, kChatModes)},
                 {"turn_taking", f.turn_taking},
                 {"turn_timeout_ms", f.turn_timeout.ms},
                 {"max_message_length", f.max_message_length ? json(*f.max_message_length) : json(nullptr)}};

    auto& s = c.action_structure;
    json act = {{"negotiation", enum_name(s.negotiation, kNegotiations)},
                {"price_limits", s.price_limits ? json{{"min_cents", s.price_limits->min.cents},
                                                       {"max_cents", s.price_limits->max.cents}}
                                                : json(nullptr)},
                {"max_trade_frequency", s.max_trade_frequency ? json{{"count", s.max_trade_frequency->count},
                                                                     {"window_ms", s.max_trade_frequency->window.ms}}
                                                              : json(nullptr)},
                {"concurrent_offers_allowed", s.concurrent_offers_allowed},
                {"escrow", enum_name(s.escrow, kEscrows)}};

    json social = {{"agent_display_names", c.social_framing.agent_display_names},
                   {"persona_visible", c.social_framing.persona_visible},
                   {"group_cues", c.social_framing.group_cues}};

    auto& r = c.agent_responsiveness;
    json latency;
    switch (r.latency.kind) {
        case LatencyKind::Immediate: latency = {{"kind", "immediate"}}; break;
        case LatencyKind::Fixed: latency = {{"kind", "fixed"}, {"ms", r.latency.fixed.ms}}; break;
        case LatencyKind::Uniform:
            latency = {{"kind", "uniform"}, {"min_ms", r.latency.min.ms}, {"max_ms", r.latency.max.ms}};
            break;
    }
    json resp = {{"latency", latency},
                 {"typing_indicator", r.typing_indicator},
                 {"adaptive_feedback", r.adaptive_feedback},
                 {"explanations", enum_name(r.explanations, kExplanations)},
                 {"perception_interval_ms", r.perception_interval ? json(r.perception_interval->ms) : json(nullptr)}};

    return {{"information_flow", info},
            {"action_structure", act},
            {"social_framing", social},
            {"agent_responsiveness", resp}};
}

InteractionControls load_controls_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) invalid("cannot read " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) invalid(path + " is not valid JSON");
    return controls_from_json(j);
}

std::vector<std::string> check_controls(const InteractionControls& c, const ecl::ExperimentConfig& config) {
    std::vector<std::string> out;
    const auto& p = config.parameters;
    if (auto& pl = c.action_structure.price_limits) {
        if (auto lo = p.money("price_min"); lo && pl->min < *lo) out.push_back("price_limits.min is below the paradigm's price_min");
        if (auto hi = p.money("price_max"); hi && pl->max > *hi) out.push_back("price_limits.max is above the paradigm's price_max");
    }
    const ecl::ObjectClass* participant = config.find_class(ecl::kParticipantClass);
    for (auto& field : c.information_flow.dashboard_fields) {
        if (!participant || !participant->find(field))
            out.push_back("dashboard field '" + field + "' is not a Participant attribute");
        else if (participant->find(field)->visibility == ecl::Visibility::Private)
            out.push_back("dashboard field '" + field + "' is private");
    }
    bool has_message = config.find_action("message") != nullptr;
    if (!has_message && c.information_flow.chat_mode != ChatMode::Disabled)
        out.push_back("chat is enabled but the paradigm declares no message action");
    return out;
}

PriceLimits effective_price_limits(const InteractionControls& c, const ecl::ParadigmParameters& p) {
    PriceLimits lim{p.money("price_min").value_or(Money{0}),
                    p.money("price_max").value_or(Money{std::numeric_limits<std::int64_t>::max()})};
    if (auto& o = c.action_structure.price_limits) {
        lim.min = std::max(lim.min, o->min);
        lim.max = std::min(lim.max, o->max);
    }
    return lim;
}

Duration effective_perception_interval(const InteractionControls& c, const ecl::ParadigmParameters& p) {
    return c.agent_responsiveness.perception_interval.value_or(p.perception_interval());
}

std::int64_t schedule_agent_action(const InteractionControls& c, std::int64_t now, SeededStream& stream) {
    auto& l = c.agent_responsiveness.latency;
    switch (l.kind) {
        case LatencyKind::Immediate: return now;
        case LatencyKind::Fixed: return now + l.fixed.ms;
        case LatencyKind::Uniform: return now + stream.uniform(l.min.ms, l.max.ms);
    }
    return now;
}

std::string band_label(double value, double lo, double hi) {
    if (!(hi > lo)) return "medium";
    double q = (value - lo) / (hi - lo);
    if (q < 0.25) return "low";
    if (q < 0.5) return "medium";
    if (q < 0.75) return "high";
    return "very high";
}

}  // namespace agora::controls
