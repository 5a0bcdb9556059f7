#include "agora/engine/visibility.hpp"

#include <algorithm>

#include "agora/common/error.hpp"
#include "agora/ecl/builtins.hpp"
#include "agora/engine/engine.hpp"

namespace agora::engine {
namespace {

json shown(const Value& v) { return value_to_json(v, WireStyle::Display); }

std::optional<double> numeric(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v)) return *d;
    if (auto* m = std::get_if<Money>(&v)) return static_cast<double>(m->cents);
    if (auto* t = std::get_if<Duration>(&v)) return static_cast<double>(t->ms);
    return std::nullopt;
}

/// Participant attributes a record carries for this paradigm: the declared
/// class attributes, plus wealth which every paradigm has.
std::vector<std::string> own_attributes(const ecl::ExperimentConfig& config) {
    std::vector<std::string> out{"wealth"};
    if (auto* cls = config.find_class(ecl::kParticipantClass))
        for (auto& a : cls->attributes)
            if (a.name != "wealth") out.push_back(a.name);
    return out;
}

const ecl::SlotView& slot(const std::vector<ecl::SlotView>& views, ecl::ModuleSlot s) {
    return views[static_cast<std::size_t>(s)];
}

bool peer_may_see(const ecl::ResolvedBinding& b, const ParticipantRecord& viewer, const ParticipantRecord& peer) {
    if (b.visibility == ecl::Visibility::Private) return false;
    if (b.visibility == ecl::Visibility::GroupScoped) return viewer.group == peer.group;
    return true;
}

}  // namespace

std::string shown_name(const SessionState& s, const ParticipantRecord& p) {
    if (p.kind == ParticipantKind::Agent) {
        auto& names = s.controls.social_framing.agent_display_names;
        if (auto it = names.find(p.participant_id); it != names.end()) return it->second;
    }
    return p.display_name;
}

ecl::Viewer viewer_of(const ParticipantRecord& p) { return ecl::Viewer{p.participant_id, p.kind, p.role, p.group}; }

ecl::ViewOverlay overlay_for(const controls::InteractionControls& c, const ecl::Viewer& viewer) {
    const auto& flow = c.information_flow;
    return ecl::ViewOverlay{flow.dashboard_enabled && flow.dashboard_audience.matches(viewer.kind, viewer.group),
                            flow.dashboard_fields};
}

json filter_visible_state(const SessionState& s, const std::string& viewer_id, std::int64_t now) {
    const ParticipantRecord* me = s.find(viewer_id);
    if (!me) throw Error(ErrorCode::UnknownParticipant, "unknown participant " + viewer_id);
    const auto& cfg = *s.config;
    const auto viewer = viewer_of(*me);
    const auto views = ecl::resolve_views(cfg, viewer, overlay_for(s.controls, viewer));

    json own = json::object();
    for (auto& attr : own_attributes(cfg))
        if (auto v = participant_value(s, *me, attr)) own[attr] = shown(*v);
    own["display_name"] = shown_name(s, *me);
    if (!me->orders.empty()) {
        json lines = json::array();
        for (auto& o : me->orders) lines.push_back({{"index", o.index}, {"shape", o.shape}, {"fulfilled", o.fulfilled}});
        own["order_lines"] = lines;
    }
    json queue = json::array();
    for (auto& j : s.jobs)
        if (j.owner == me->participant_id) queue.push_back({{"shape", j.shape}, {"completes_at_ms", j.completes_at}});
    if (!queue.empty()) own["production_queue"] = queue;

    auto value_of = [&](const ParticipantRecord& p, const ecl::AttributeRef& ref) -> json {
        if (ref.owner == ecl::kParticipantClass) {
            if (ref.attribute == "display_name") return shown_name(s, p);
            auto v = participant_value(s, p, ref.attribute);
            return v ? shown(*v) : json(nullptr);
        }
        if (auto* cls = cfg.find_class(ref.owner))
            if (auto* a = cls->find(ref.attribute)) return shown(a->default_value);
        return nullptr;
    };

    json modules = json::object();
    for (auto& sv : views) {
        json rows = json::array();
        for (auto& b : sv.bindings) {
            // shared slots render Participant attributes per peer, below
            if (!ecl::is_owner_slot(sv.slot) && b.ref.owner == ecl::kParticipantClass) continue;
            rows.push_back({{"ref", b.ref.str()}, {"label", b.label}, {"value", value_of(*me, b.ref)}});
        }
        if (!rows.empty()) modules[std::string(ecl::to_string(sv.slot))] = rows;
    }

    const auto& framing = s.controls.social_framing;
    json peers = json::array();
    for (auto& p : s.participants) {
        if (p.participant_id == viewer_id) continue;
        json attrs = json::object();
        for (auto& b : slot(views, ecl::ModuleSlot::Social).bindings)
            if (b.ref.owner == ecl::kParticipantClass && peer_may_see(b, *me, p))
                attrs[b.ref.attribute] = value_of(p, b.ref);
        attrs["display_name"] = shown_name(s, p);
        json peer = {{"participant_id", p.participant_id}, {"attributes", attrs}};
        if (auto it = framing.group_cues.find(p.group); it != framing.group_cues.end()) peer["group_cue"] = it->second;
        if (framing.persona_visible && p.kind == ParticipantKind::Agent && p.persona_profile)
            peer["persona"] = *p.persona_profile;
        peers.push_back(peer);
    }

    json out = {{"viewer", viewer_id},
                {"phase", to_string(s.phase)},
                {"now_ms", now},
                {"remaining_ms", s.remaining_at(now)},
                {"own", own},
                {"modules", modules},
                {"peers", peers}};

    const auto& dash = slot(views, ecl::ModuleSlot::Dashboard);
    if (overlay_for(s.controls, viewer).dashboard) {
        const bool summary = s.controls.information_flow.granularity == controls::Granularity::Summary;
        json rows = json::array();
        for (auto& p : s.participants) {
            if (p.participant_id == viewer_id) continue;
            json values = json::object();
            for (auto& b : dash.bindings) {
                if (b.ref.owner != ecl::kParticipantClass || !peer_may_see(b, *me, p)) continue;
                if (b.ref.attribute == "display_name") {
                    values["display_name"] = shown_name(s, p);
                    continue;
                }
                auto v = participant_value(s, p, b.ref.attribute);
                if (!v) continue;
                auto x = numeric(*v);
                if (summary && x) {
                    double lo = *x, hi = *x;
                    for (auto& q : s.participants)
                        if (auto w = participant_value(s, q, b.ref.attribute))
                            if (auto y = numeric(*w)) {
                                lo = std::min(lo, *y);
                                hi = std::max(hi, *y);
                            }
                    values[b.ref.attribute] = controls::band_label(*x, lo, hi);
                } else {
                    values[b.ref.attribute] = shown(*v);
                }
            }
            rows.push_back({{"participant_id", p.participant_id}, {"values", values}});
        }
        out["dashboard"] = {{"granularity", controls::to_string(s.controls.information_flow.granularity)},
                            {"rows", rows}};
    }

    json offers = json::array();
    for (auto& o : s.offers) {
        if (o.status != OfferStatus::Pending) continue;
        if (o.proposer != viewer_id && o.target != viewer_id) continue;
        json j = {{"transaction_id", o.transaction_id},
                  {"from", o.proposer},
                  {"to", o.target},
                  {"offer_type", to_string(o.offer_type)},
                  {"shape", o.shape},
                  {"price_per_unit", to_dollars(o.price)},
                  {"created_at_ms", o.created_at},
                  {"direction", o.proposer == viewer_id ? "sent" : "received"}};
        if (o.counter_to) j["counter_to"] = *o.counter_to;
        offers.push_back(j);
    }
    out["offers"] = offers;

    json chat = {{"mode", controls::to_string(s.controls.information_flow.chat_mode)}};
    if (s.controls.information_flow.turn_taking && s.phase == Phase::Live) chat["turn_holder"] = turn_holder(s, now);
    out["chat"] = chat;
    return out;
}

std::set<std::string> visible_selectors(const json& visible) {
    // .items() borrows its json, so every section is held in a named local
    std::set<std::string> out;
    const json own = visible.value("own", json::object());
    for (auto& [k, _] : own.items())
        if (k != "order_lines" && k != "production_queue") out.insert("own." + k);  // structure, not attributes
    const json modules = visible.value("modules", json::object());
    for (auto& [slot_name, rows] : modules.items())
        for (auto& r : rows) out.insert("module." + slot_name + "." + r.value("ref", ""));
    const json peers = visible.value("peers", json::array());
    for (auto& p : peers) {
        const json attrs = p.value("attributes", json::object());
        for (auto& [k, _] : attrs.items()) out.insert("peer." + k);
        if (p.contains("group_cue")) out.insert("peer.group_cue");
        if (p.contains("persona")) out.insert("peer.persona");
    }
    if (visible.contains("dashboard")) {
        out.insert("dashboard");
        const json rows = visible["dashboard"].value("rows", json::array());
        for (auto& r : rows) {
            const json values = r.value("values", json::object());
            for (auto& [k, _] : values.items()) out.insert("dashboard." + k);
        }
    }
    return out;
}

std::set<std::string> visible_spec(const ecl::ExperimentConfig& config, const controls::InteractionControls& c,
                                   const ecl::Viewer& viewer, bool same_group_peers) {
    std::set<std::string> out;
    for (auto& attr : own_attributes(config)) out.insert("own." + attr);
    out.insert("own.display_name");
    const auto views = ecl::resolve_views(config, viewer, overlay_for(c, viewer));
    auto peer_visible = [&](const ecl::ResolvedBinding& b) {
        if (b.visibility == ecl::Visibility::Private) return false;
        return b.visibility != ecl::Visibility::GroupScoped || same_group_peers;
    };
    for (auto& sv : views)
        for (auto& b : sv.bindings)
            if (ecl::is_owner_slot(sv.slot) || b.ref.owner != ecl::kParticipantClass)
                out.insert("module." + std::string(ecl::to_string(sv.slot)) + "." + b.ref.str());
    out.insert("peer.display_name");
    if (!c.social_framing.group_cues.empty()) out.insert("peer.group_cue");
    if (c.social_framing.persona_visible) out.insert("peer.persona");
    for (auto& b : slot(views, ecl::ModuleSlot::Social).bindings)
        if (b.ref.owner == ecl::kParticipantClass && peer_visible(b)) out.insert("peer." + b.ref.attribute);
    if (overlay_for(c, viewer).dashboard) {
        out.insert("dashboard");
        for (auto& b : slot(views, ecl::ModuleSlot::Dashboard).bindings)
            if (b.ref.owner == ecl::kParticipantClass && peer_visible(b)) out.insert("dashboard." + b.ref.attribute);
    }
    return out;
}

}  // namespace agora::engine
