#include "agora/agents/scripted.hpp"

#include <algorithm>
#include <map>

namespace agora::agents {

AgentScript& AgentScript::add(ScriptStep step) {
    steps_.push_back(std::move(step));
    return *this;
}

json AgentScript::respond(const acp::StateSummary& summary, const acp::AgentContext& ctx) const {
    for (auto& s : steps_)
        if (!s.trigger || s.trigger(summary, ctx)) return s.respond(summary, ctx);
    return {{"planning", "wait"}, {"actions", json::array()}};
}

std::string scripted_agent_step(const acp::StateSummary& summary, const acp::AgentContext& ctx, const AgentScript& script) {
    return script.respond(summary, ctx).dump();
}

std::string ScriptedStepper::step(const acp::AgentContext& ctx, const acp::StateSummary& summary,
                                  const std::vector<acp::ValidationError>&, Duration) {
    return scripted_agent_step(summary, ctx, script_);
}

namespace {

struct View {
    const json& own;
    std::map<std::string, std::int64_t> held;
    std::map<std::string, std::int64_t> needed;  // unfulfilled order lines per shape
    double wealth = 0;
    std::string specialty;

    explicit View(const acp::StateSummary& s) : own(s.visible_state["own"]) {
        for (auto& shape : own.value("inventory", json::array())) ++held[shape.get<std::string>()];
        for (auto& line : own.value("order_lines", json::array()))
            if (!line.value("fulfilled", false)) ++needed[line.value("shape", "")];
        wealth = own.value("wealth", 0.0);
        specialty = own.value("specialty_shape", "");
    }
    std::int64_t surplus(const std::string& shape) const {
        auto h = held.count(shape) ? held.at(shape) : 0;
        auto n = needed.count(shape) ? needed.at(shape) : 0;
        return h - n;
    }
};

/// Peer with `specialty` according to the dashboard, else a rotation over peers.
std::string pick_peer(const acp::StateSummary& s, const acp::AgentContext& ctx, const std::string& specialty,
                      bool want_match) {
    if (s.visible_state.contains("dashboard"))
        for (auto& row : s.visible_state["dashboard"]["rows"]) {
            auto spec = row["values"].value("specialty_shape", "");
            if (!spec.empty() && (spec == specialty) == want_match) return row.value("participant_id", "");
        }
    if (ctx.peers.empty()) return "";
    const auto turn = ctx.perception_interval.ms > 0 ? s.timestamp_ms / ctx.perception_interval.ms : 0;
    return ctx.peers[static_cast<std::size_t>(turn) % ctx.peers.size()].participant_id;
}

json plain_trader(const acp::StateSummary& s, const acp::AgentContext& ctx, const ShapeFactoryScriptOptions& o) {
    View me(s);
    json actions = json::array();
    auto param = [&](const char* k, double dflt) { return ctx.parameters.value(k, dflt); };

    if (auto* msg = ctx.find_action("message")) {
        int sent = 0;
        for (auto& m : s.message_history) sent += m.value("from", "") == ctx.participant_id;
        if (sent < o.messages) {
            json a = {{"type", "message"},
                      {"content", "anyone need " + me.specialty + "? selling at $" + std::to_string(static_cast<int>(o.sell_price))},
                      {"reasoning", "advertise my specialty"}};
            if (msg->find("recipient")->required) {
                auto to = pick_peer(s, ctx, me.specialty, false);
                if (to.empty()) to = ctx.peers.front().participant_id;
                a["recipient"] = to;
            }
            actions.push_back(a);
        }
    }

    bool sent_pending = false;
    for (auto& offer : s.pending_offers) {
        if (offer.value("direction", "") == "sent") {
            sent_pending = true;
            continue;
        }
        const auto shape = offer.value("shape", "");
        const double price = offer.value("price_per_unit", 0.0);
        bool accept = false;
        if (offer.value("offer_type", "") == "sell") {
            accept = me.surplus(shape) < 0 && price <= o.max_buy_price && price <= me.wealth;
            if (accept) {
                me.wealth -= price;
                ++me.held[shape];
            }
        } else {
            accept = me.surplus(shape) > 0 && price >= o.sell_price * 0.8;
            if (accept) --me.held[shape];
        }
        actions.push_back({{"type", "trade_response"},
                           {"transaction_id", offer.value("transaction_id", "")},
                           {"response_type", accept ? "accept" : "decline"},
                           {"reasoning", accept ? "fits my plan" : "does not fit my plan"}});
    }

    json indices = json::array();
    std::map<std::string, std::int64_t> available;
    for (auto& [shape, n] : me.held) available[shape] = n;
    for (auto& line : me.own.value("order_lines", json::array())) {
        if (line.value("fulfilled", false)) continue;
        auto shape = line.value("shape", "");
        if (available[shape] > 0) {
            --available[shape];
            indices.push_back(line.value("index", 0));
        }
    }
    if (!indices.empty()) actions.push_back({{"type", "fulfill_order"}, {"order_indices", indices}, {"reasoning", "earn the incentive"}});

    const double spec_cost = param("specialty_cost", 0);
    const auto max_prod = static_cast<std::int64_t>(param("max_production_num", 0));
    if (me.own.value("in_production", 0) == 0 && me.own.value("produced_count", 0) < max_prod && me.wealth >= spec_cost)
        actions.push_back({{"type", "produce_shape"}, {"shape", me.specialty}, {"quantity", 1}, {"reasoning", "cheap to make"}});

    if (!sent_pending && ctx.find_action("propose_trade_offer")) {
        if (me.surplus(me.specialty) > 0) {
            auto to = pick_peer(s, ctx, me.specialty, false);
            if (!to.empty())
                actions.push_back({{"type", "propose_trade_offer"}, {"offer_type", "sell"}, {"shape", me.specialty},
                                   {"price_per_unit", o.sell_price}, {"target_participant", to},
                                   {"reasoning", "sell surplus"}});
        } else {
            for (auto& [shape, n] : me.needed) {
                if (me.surplus(shape) >= 0) continue;
                const double bid = o.max_buy_price * 0.8;
                if (bid > me.wealth) break;
                auto to = pick_peer(s, ctx, shape, true);
                if (!to.empty())
                    actions.push_back({{"type", "propose_trade_offer"}, {"offer_type", "buy"}, {"shape", shape},
                                       {"price_per_unit", bid}, {"target_participant", to},
                                       {"reasoning", "an order needs it"}});
                break;
            }
        }
    }
    return {{"planning", "plain trader"}, {"actions", actions}};
}

}  // namespace

AgentScript shape_factory_script(const ShapeFactoryScriptOptions& options) {
    AgentScript script;
    script.add({"trade",
                [](const acp::StateSummary& s, const acp::AgentContext&) {
                    return s.visible_state.is_object() && s.visible_state.contains("own");
                },
                [options](const acp::StateSummary& s, const acp::AgentContext& ctx) { return plain_trader(s, ctx, options); }});
    return script;
}

}  // namespace agora::agents
