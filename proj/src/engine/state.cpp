#include "agora/engine/state.hpp"

#include <algorithm>

#include "agora/common/error.hpp"

namespace agora::engine {

json roster_entry_to_json(const RosterEntry& r) {
    json j = {{"participant_id", r.participant_id},
              {"kind", to_string(r.kind)},
              {"display_name", r.display_name},
              {"group", r.group},
              {"role", r.role}};
    if (r.persona_profile) j["persona_profile"] = *r.persona_profile;
    return j;
}

RosterEntry roster_entry_from_json(const json& j) {
    if (!j.is_object() || !j.contains("participant_id") || !j["participant_id"].is_string())
        throw Error(ErrorCode::RosterMismatch, "roster entries need a participant_id string");
    RosterEntry r;
    r.participant_id = j["participant_id"].get<std::string>();
    auto kind = participant_kind_from_string(j.value("kind", "human"));
    if (!kind) throw Error(ErrorCode::RosterMismatch, "kind must be human or agent");
    r.kind = *kind;
    r.display_name = j.value("display_name", r.participant_id);
    r.group = j.value("group", "default");
    r.role = j.value("role", "participant");
    if (j.contains("persona_profile") && j["persona_profile"].is_string())
        r.persona_profile = j["persona_profile"].get<std::string>();
    return r;
}

std::int64_t ParticipantRecord::held(const std::string& shape) const {
    auto it = inventory.find(shape);
    return it == inventory.end() ? 0 : it->second;
}

std::string_view to_string(OfferType t) { return t == OfferType::Buy ? "buy" : "sell"; }

std::string_view to_string(OfferStatus s) {
    switch (s) {
        case OfferStatus::Pending: return "pending";
        case OfferStatus::Accepted: return "accepted";
        case OfferStatus::Declined: return "declined";
        case OfferStatus::Cancelled: return "cancelled";
        case OfferStatus::Expired: return "expired";
    }
    return "?";
}

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Created: return "created";
        case Phase::Live: return "live";
        case Phase::Ended: return "ended";
    }
    return "?";
}

const ParticipantRecord* SessionState::find(const std::string& pid) const {
    for (auto& p : participants)
        if (p.participant_id == pid) return &p;
    return nullptr;
}

ParticipantRecord* SessionState::find(const std::string& pid) {
    return const_cast<ParticipantRecord*>(std::as_const(*this).find(pid));
}

const TradeOffer* SessionState::find_offer(const std::string& id) const {
    for (auto& o : offers)
        if (o.transaction_id == id) return &o;
    return nullptr;
}

TradeOffer* SessionState::find_offer(const std::string& id) {
    return const_cast<TradeOffer*>(std::as_const(*this).find_offer(id));
}

std::int64_t SessionState::remaining_at(std::int64_t at) const {
    const auto duration = config->parameters.session_duration().ms;
    if (phase == Phase::Created) return duration;
    return std::max<std::int64_t>(0, started_at + duration - at);
}

std::int64_t SessionState::in_production(const std::string& pid) const {
    return std::count_if(jobs.begin(), jobs.end(), [&](const ProductionJob& j) { return j.owner == pid; });
}

std::optional<Value> participant_value(const SessionState& s, const ParticipantRecord& p, const std::string& attr) {
    if (attr == "wealth") return p.wealth;
    if (attr == "display_name") return p.display_name;
    if (attr == "group") return p.group;
    if (attr == "specialty_shape") return EnumValue{p.specialty_shape};
    if (attr == "inventory") {
        ListValue l;
        for (auto& [shape, n] : p.inventory)
            for (std::int64_t i = 0; i < n; ++i) l.items.push_back(shape);
        return l;
    }
    if (attr == "orders") {
        ListValue l;
        for (auto& o : p.orders)
            if (!o.fulfilled) l.items.push_back(o.shape);
        return l;
    }
    if (attr == "orders_fulfilled") return p.orders_fulfilled;
    if (attr == "produced_count") return p.produced_count;
    if (attr == "in_production") return s.in_production(p.participant_id);
    auto it = p.extras.find(attr);
    if (it != p.extras.end()) return it->second;
    return std::nullopt;
}

json offer_to_json(const TradeOffer& o) {
    json j = {{"transaction_id", o.transaction_id},
              {"proposer", o.proposer},
              {"target", o.target},
              {"offer_type", to_string(o.offer_type)},
              {"shape", o.shape},
              {"price_cents", o.price.cents},
              {"status", to_string(o.status)},
              {"created_at", o.created_at},
              {"resolved_at", o.resolved_at}};
    if (o.counter_to) j["counter_to"] = *o.counter_to;
    return j;
}

json message_to_json(const MessageRecord& m) {
    return {{"message_id", m.message_id},
            {"ts", m.ts},
            {"sender", m.sender},
            {"recipients", m.recipients},
            {"channel", m.channel == ChatChannel::Private ? "private" : "group"},
            {"body", m.body}};
}

json participant_to_json(const SessionState& s, const ParticipantRecord& p) {
    json orders = json::array();
    for (auto& o : p.orders) orders.push_back({{"index", o.index}, {"shape", o.shape}, {"fulfilled", o.fulfilled}});
    json extras = json::object();
    for (auto& [k, v] : p.extras) extras[k] = value_to_json(v);
    json j = {{"participant_id", p.participant_id},
              {"kind", to_string(p.kind)},
              {"display_name", p.display_name},
              {"group", p.group},
              {"role", p.role},
              {"wealth_cents", p.wealth.cents},
              {"specialty_shape", p.specialty_shape},
              {"inventory", p.inventory},
              {"orders", orders},
              {"orders_fulfilled", p.orders_fulfilled},
              {"produced_count", p.produced_count},
              {"in_production", s.in_production(p.participant_id)},
              {"extras", extras}};
    if (p.persona_profile) j["persona_profile"] = *p.persona_profile;
    return j;
}

json state_to_json(const SessionState& s) {
    json participants = json::array();
    for (auto& p : s.participants) participants.push_back(participant_to_json(s, p));
    json offers = json::array();
    for (auto& o : s.offers) offers.push_back(offer_to_json(o));
    json jobs = json::array();
    for (auto& j : s.jobs)
        jobs.push_back({{"job_id", j.job_id},
                        {"owner", j.owner},
                        {"shape", j.shape},
                        {"started_at", j.started_at},
                        {"completes_at", j.completes_at}});
    json messages = json::array();
    for (auto& m : s.messages) messages.push_back(message_to_json(m));
    return {{"session_id", s.session_id},
            {"phase", to_string(s.phase)},
            {"started_at", s.started_at},
            {"now", s.now},
            {"next_seq", s.next_seq},
            {"next_offer", s.next_offer},
            {"next_job", s.next_job},
            {"next_message", s.next_message},
            {"turn_index", s.turn_index},
            {"turn_started_at", s.turn_started_at},
            {"participants", participants},
            {"offers", offers},
            {"jobs", jobs},
            {"messages", messages},
            {"ledger",
             {{"costs_paid_cents", s.ledger.costs_paid.cents},
              {"incentives_earned_cents", s.ledger.incentives_earned.cents},
              {"shapes_completed", s.ledger.shapes_completed},
              {"shapes_consumed", s.ledger.shapes_consumed}}}};
}

Money total_wealth(const SessionState& s) {
    Money m;
    for (auto& p : s.participants) m.cents += p.wealth.cents;
    return m;
}

std::int64_t total_shapes(const SessionState& s) {
    std::int64_t n = 0;
    for (auto& p : s.participants)
        for (auto& [_, c] : p.inventory) n += c;
    return n;
}

}  // namespace agora::engine
