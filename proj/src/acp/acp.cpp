#include "agora/acp/acp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "agora/ecl/builtins.hpp"
#include "agora/engine/visibility.hpp"

namespace agora::acp {

namespace {

double dollars(Money m) { return static_cast<double>(m.cents) / 100.0; }

FieldSchema field(std::string name, FieldKind kind, std::string description, bool required = true) {
    FieldSchema f;
    f.name = std::move(name);
    f.kind = kind;
    f.required = required;
    f.description = std::move(description);
    return f;
}

FieldSchema enum_field(std::string name, std::vector<std::string> variants, std::string description) {
    auto f = field(std::move(name), FieldKind::Enum, std::move(description));
    f.variants = std::move(variants);
    return f;
}

ActionSchema builtin_schema(const std::string& type, const engine::SessionState& s, const engine::ParticipantRecord& p) {
    const auto& params = s.config->parameters;
    const auto& c = s.controls;
    ActionSchema a;
    a.type = type;
    if (type == "message") {
        a.description = "Send a chat message.";
        const bool group = c.information_flow.chat_mode == controls::ChatMode::Group;
        a.fields.push_back(field("recipient", FieldKind::Participant,
                                 group ? "Ignored in group chat: the message goes to your whole group."
                                       : "Participant code of the one recipient.",
                                 !group));
        auto content = field("content", FieldKind::String, "Message text.");
        if (c.information_flow.max_message_length) content.max = static_cast<double>(*c.information_flow.max_message_length);
        a.fields.push_back(content);
    } else if (type == "propose_trade_offer") {
        a.description = "Offer to buy or sell one shape to one participant at a price per unit.";
        a.fields.push_back(enum_field("offer_type", {"buy", "sell"}, "Whether you buy or sell."));
        a.fields.push_back(enum_field("shape", s.shape_types(), "Shape to trade."));
        auto price = field("price_per_unit", FieldKind::Number, "Price in dollars.");
        auto limits = controls::effective_price_limits(c, params);
        price.min = dollars(limits.min);
        price.max = dollars(limits.max);
        a.fields.push_back(price);
        a.fields.push_back(field("target_participant", FieldKind::Participant, "Participant code of the counterpart."));
        if (c.action_structure.negotiation == controls::Negotiation::OpenWithCounteroffers)
            a.fields.push_back(field("counter_to", FieldKind::Transaction,
                                     "Transaction id of a received offer this one answers.", false));
    } else if (type == "cancel_trade_offer") {
        a.description = "Withdraw a pending offer you sent.";
        a.fields.push_back(field("transaction_id", FieldKind::Transaction, "Id of a pending offer you sent."));
    } else if (type == "trade_response") {
        a.description = "Accept or decline a pending offer you received.";
        a.fields.push_back(field("transaction_id", FieldKind::Transaction, "Id of a pending offer you received."));
        a.fields.push_back(enum_field("response_type", {"accept", "decline"}, "Your answer."));
    } else if (type == "produce_shape") {
        a.description = "Spend money and time to produce shapes.";
        a.fields.push_back(enum_field("shape", s.shape_types(), "Shape to produce."));
        auto q = field("quantity", FieldKind::Integer, "How many.");
        q.min = 1;
        if (auto m = params.integer("max_production_num")) q.max = static_cast<double>(*m);
        a.fields.push_back(q);
    } else if (type == "fulfill_order") {
        a.description = "Use inventory shapes to complete order lines.";
        auto idx = field("order_indices", FieldKind::IndexList, "Order line indices, e.g. [0, 1].");
        idx.min = 0;
        idx.max = static_cast<double>(p.orders.size()) - 1;
        a.fields.push_back(idx);
    }
    return a;
}

FieldKind kind_for(const TypeSpec& t) {
    switch (t.kind) {
        case TypeKind::Integer: return FieldKind::Integer;
        case TypeKind::Decimal:
        case TypeKind::Money:
        case TypeKind::Duration: return FieldKind::Number;
        case TypeKind::Enum: return FieldKind::Enum;
        default: return FieldKind::String;
    }
}

std::string rules_text(const engine::SessionState& s) {
    const auto& cfg = *s.config;
    std::ostringstream out;
    out << cfg.title << ": " << cfg.description << "\n";
    out << "Parameters:\n";
    for (auto& e : cfg.parameters.entries) out << "- " << e.name << " = " << value_to_json(e.value, WireStyle::Display).dump() << "\n";
    bool any = false;
    for (auto& pol : cfg.policies) {
        if (pol.deny_message.empty()) continue;
        if (!any) out << "Rules (an action breaking one is refused with the quoted reason):\n";
        any = true;
        out << "- " << pol.name << ": \"" << pol.deny_message << "\"\n";
    }
    return out.str();
}

bool involves(const engine::MessageRecord& m, const std::string& pid) {
    return m.sender == pid || std::find(m.recipients.begin(), m.recipients.end(), pid) != m.recipients.end();
}

json message_json(const engine::MessageRecord& m) {
    return {{"message_id", m.message_id},
            {"ts_ms", m.ts},
            {"from", m.sender},
            {"to", m.recipients},
            {"channel", m.channel == engine::ChatChannel::Group ? "group" : "private"},
            {"content", m.body}};
}

std::string_view field_kind_name(FieldKind k) {
    switch (k) {
        case FieldKind::String: return "string";
        case FieldKind::Integer: return "integer";
        case FieldKind::Number: return "number";
        case FieldKind::Enum: return "enum";
        case FieldKind::Participant: return "participant";
        case FieldKind::Transaction: return "transaction";
        case FieldKind::IndexList: return "index_list";
    }
    return "string";
}

std::size_t code_points(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
}

std::string fmt(double v) {
    std::ostringstream o;
    o << v;
    return o.str();
}

/// Parses a response body: the whole text, or the outermost {...} when the
/// model wrapped it in prose or a code fence.
std::optional<json> parse_body(std::string_view raw) {
    auto j = json::parse(raw.begin(), raw.end(), nullptr, false);
    if (!j.is_discarded()) return j;
    auto open = raw.find('{');
    auto close = raw.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    auto inner = raw.substr(open, close - open + 1);
    j = json::parse(inner.begin(), inner.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

class Checker {
public:
    Checker(const AgentContext& ctx, const json& pending) : ctx_(ctx), pending_(pending) {}

    /// First problem with action `i`, or nullopt.
    std::optional<ValidationError> check(int i, const json& a, AgentAction& out) const {
        auto err = [&](ErrorCode code, std::string f, std::string reason) {
            return ValidationError{code, i, std::move(f), std::move(reason)};
        };
        if (!a.is_object()) return err(ErrorCode::SchemaViolation, "", "action must be a JSON object");
        auto t = a.find("type");
        if (t == a.end() || !t->is_string()) return err(ErrorCode::SchemaViolation, "type", "type must be a string");
        out.type = t->get<std::string>();
        const ActionSchema* schema = ctx_.find_action(out.type);
        if (!schema) return err(ErrorCode::ForbiddenActionType, "type", "'" + out.type + "' is not a permitted action");
        if (auto r = a.find("reasoning"); r != a.end()) {
            if (!r->is_string()) return err(ErrorCode::SchemaViolation, "reasoning", "reasoning must be a string");
            out.reasoning = r->get<std::string>();
        }
        for (auto& [k, v] : a.items()) {
            if (k == "type" || k == "reasoning") continue;
            if (!schema->find(k)) return err(ErrorCode::SchemaViolation, k, "unexpected field for " + out.type);
        }
        for (auto& f : schema->fields) {
            auto it = a.find(f.name);
            if (it == a.end() || it->is_null()) {
                if (f.required) return err(ErrorCode::SchemaViolation, f.name, "required field is missing");
                continue;
            }
            json normalized;
            if (auto e = check_field(out.type, f, *it, normalized)) return err(e->first, f.name, e->second);
            out.fields[f.name] = normalized;
        }
        return std::nullopt;
    }

private:
    using Problem = std::optional<std::pair<ErrorCode, std::string>>;

    static Problem schema(std::string reason) { return std::pair{ErrorCode::SchemaViolation, std::move(reason)}; }

    Problem range(const FieldSchema& f, double v) const {
        if ((f.min && v < *f.min) || (f.max && v > *f.max))
            return schema("must be between " + fmt(f.min.value_or(-INFINITY)) + " and " + fmt(f.max.value_or(INFINITY)));
        return std::nullopt;
    }

    Problem check_field(const std::string& type, const FieldSchema& f, const json& v, json& out) const {
        if (f.ecl_type) {
            auto parsed = value_from_json(v, *f.ecl_type, WireStyle::Display);
            if (!parsed) return schema("does not conform to its declared type");
            out = v;
            return std::nullopt;
        }
        switch (f.kind) {
            case FieldKind::String: {
                if (!v.is_string()) return schema("must be a string");
                auto s = v.get<std::string>();
                if (f.max && static_cast<double>(code_points(s)) > *f.max)
                    return schema("longer than " + fmt(*f.max) + " characters");
                out = s;
                return std::nullopt;
            }
            case FieldKind::Integer: {
                if (!v.is_number()) return schema("must be an integer");
                double d = v.get<double>();
                if (!std::isfinite(d) || d != std::floor(d)) return schema("must be an integer");
                if (auto p = range(f, d)) return p;
                out = static_cast<std::int64_t>(d);
                return std::nullopt;
            }
            case FieldKind::Number: {
                if (!v.is_number()) return schema("must be a number");
                double d = v.get<double>();
                if (!std::isfinite(d)) return schema("must be a finite number");
                double cents = std::round(d * 100.0);
                if (std::abs(d * 100.0 - cents) > 1e-6) return schema("at most two decimal places");
                if (auto p = range(f, d)) return p;
                out = cents / 100.0;
                return std::nullopt;
            }
            case FieldKind::Enum: {
                if (!v.is_string()) return schema("must be one of " + join(f.variants));
                auto s = v.get<std::string>();
                if (std::find(f.variants.begin(), f.variants.end(), s) == f.variants.end())
                    return schema("must be one of " + join(f.variants));
                out = s;
                return std::nullopt;
            }
            case FieldKind::Participant: {
                if (!v.is_string()) return schema("must be a participant code");
                auto s = v.get<std::string>();
                if (type == "message" && !f.required) {
                    out = s;  // group chat: recipient is informational
                    return std::nullopt;
                }
                if (s == ctx_.participant_id || s == ctx_.display_name) return schema("cannot be yourself");
                for (auto& p : ctx_.peers)
                    if (p.participant_id == s || p.display_name == s) {
                        out = p.participant_id;
                        return std::nullopt;
                    }
                return schema("unknown participant '" + s + "'");
            }
            case FieldKind::Transaction: {
                if (!v.is_string()) return schema("must be a transaction id string");
                auto id = v.get<std::string>();
                const std::string direction = type == "cancel_trade_offer" ? "sent" : "received";
                for (auto& o : pending_)
                    if (o.value("transaction_id", "") == id && o.value("direction", "") == direction) {
                        out = id;
                        return std::nullopt;
                    }
                return std::pair{ErrorCode::UnknownTransactionReference,
                                 "'" + id + "' is not a pending offer you " + direction +
                                     "; use an id from pending_offers"};
            }
            case FieldKind::IndexList: {
                json list = v;
                if (v.is_string()) {
                    auto s = v.get<std::string>();
                    list = json::parse(s, nullptr, false);
                }
                if (!list.is_array()) return schema("must be a list of order indices");
                json norm = json::array();
                for (auto& e : list) {
                    if (!e.is_number_integer()) return schema("indices must be integers");
                    auto d = e.get<double>();
                    if (auto p = range(f, d)) return schema("index " + e.dump() + " " + p->second);
                    norm.push_back(e.get<std::int64_t>());
                }
                out = norm;
                return std::nullopt;
            }
        }
        return schema("unsupported field");
    }

    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "|" : "") + v[i];
        return out;
    }

    const AgentContext& ctx_;
    const json& pending_;
};

}  // namespace

const FieldSchema* ActionSchema::find(std::string_view name) const {
    for (auto& f : fields)
        if (f.name == name) return &f;
    return nullptr;
}

const ActionSchema* AgentContext::find_action(std::string_view type) const {
    for (auto& a : permitted_actions)
        if (a.type == type) return &a;
    return nullptr;
}

bool AgentContext::permits(std::string_view selector) const {
    std::string s(selector);
    return private_state_spec.count(s) || public_state_spec.count(s);
}

AgentContext build_agent_context(const engine::SessionState& s, const std::string& participant_id) {
    const auto* p = s.find(participant_id);
    if (!p) throw Error(ErrorCode::UnknownParticipant, "unknown participant " + participant_id);
    if (p->kind != ParticipantKind::Agent) throw Error(ErrorCode::NotAnAgent, participant_id + " is not an agent seat");
    const auto& cfg = *s.config;
    const auto& c = s.controls;

    AgentContext ctx;
    ctx.session_id = s.session_id;
    ctx.participant_id = p->participant_id;
    ctx.display_name = engine::shown_name(s, *p);
    ctx.group = p->group;
    ctx.role = p->role;
    ctx.experiment_rules = rules_text(s);
    ctx.persona_profile = p->persona_profile.value_or("");
    ctx.perception_interval = controls::effective_perception_interval(c, cfg.parameters);

    const bool chat = c.information_flow.chat_mode != controls::ChatMode::Disabled;
    for (auto& def : cfg.actions) {
        if (def.actor_role != p->role) continue;
        if (def.name == "message" && !chat) continue;
        if (ecl::is_builtin_action(def.name)) {
            ctx.permitted_actions.push_back(builtin_schema(def.name, s, *p));
            continue;
        }
        ActionSchema a;
        a.type = def.name;
        a.description = "Paradigm action " + def.name + ".";
        for (auto& arg : def.args) {
            FieldSchema f = field(arg.name, kind_for(arg.type), "");
            f.variants = arg.type.variants;
            f.ecl_type = arg.type;
            a.fields.push_back(f);
        }
        ctx.permitted_actions.push_back(a);
    }
    if (chat && ctx.find_action("message"))
        ctx.communication_channels.push_back(std::string(controls::to_string(c.information_flow.chat_mode)));

    bool same_group = false;
    for (auto& q : s.participants) {
        if (q.participant_id == p->participant_id) continue;
        same_group |= q.group == p->group;
        ctx.peers.push_back({q.participant_id, engine::shown_name(s, q), q.group});
    }
    for (auto& sel : engine::visible_spec(cfg, c, engine::viewer_of(*p), same_group)) {
        if (sel.rfind("own.", 0) == 0 || sel.rfind("module.", 0) == 0) ctx.private_state_spec.insert(sel);
        else ctx.public_state_spec.insert(sel);
    }
    for (auto& e : cfg.parameters.entries) ctx.parameters[e.name] = value_to_json(e.value, WireStyle::Display);
    return ctx;
}

StateSummary compose_state_summary(const engine::SessionState& s, const AgentContext& ctx, std::int64_t now,
                                   SummaryCursor& cursor) {
    StateSummary out;
    out.timestamp_ms = now;
    out.remaining_ms = s.remaining_at(now);
    out.visible_state = engine::filter_visible_state(s, ctx.participant_id, now);
    for (auto& sel : engine::visible_selectors(out.visible_state))
        if (!ctx.permits(sel)) throw std::logic_error("state summary for " + ctx.participant_id + " carries " + sel);

    std::vector<const engine::MessageRecord*> mine;
    for (auto& m : s.messages)
        if (involves(m, ctx.participant_id)) mine.push_back(&m);
    for (auto* m : mine)
        if (m->message_id > cursor.last_message_id) out.new_messages.push_back(message_json(*m));
    const auto keep = std::min(mine.size(), ctx.message_history);
    for (auto it = mine.end() - static_cast<std::ptrdiff_t>(keep); it != mine.end(); ++it)
        out.message_history.push_back(message_json(**it));
    if (!s.messages.empty()) cursor.last_message_id = std::max(cursor.last_message_id, s.messages.back().message_id);

    out.pending_offers = out.visible_state["offers"];
    out.failed_actions = std::move(cursor.unreported_failures);
    cursor.unreported_failures.clear();
    return out;
}

std::string ValidationError::str() const {
    std::string out(to_string(code));
    if (action_index >= 0) out += " in action " + std::to_string(action_index);
    if (!field.empty()) out += " (" + field + ")";
    return out + ": " + reason;
}

Validation validate_agent_response(std::string_view raw, const AgentContext& ctx, const json& pending_offers) {
    auto malformed = [](std::string field, std::string reason) {
        return std::vector<ValidationError>{{ErrorCode::MalformedResponse, -1, std::move(field), std::move(reason)}};
    };
    try {
        auto body = parse_body(raw);
        if (!body) return malformed("", "response is not valid JSON");
        if (!body->is_object()) return malformed("", "response must be a JSON object");
        AgentResponse resp;
        if (auto p = body->find("planning"); p != body->end() && !p->is_null()) {
            if (!p->is_string()) return malformed("planning", "planning must be a string");
            resp.planning = p->get<std::string>();
        }
        auto acts = body->find("actions");
        if (acts == body->end() || !acts->is_array()) return malformed("actions", "actions must be an array (empty to wait)");

        std::vector<ValidationError> errors;
        const json pending = pending_offers.is_array() ? pending_offers : json::array();
        Checker checker(ctx, pending);
        int i = 0;
        for (auto& a : *acts) {
            AgentAction out;
            if (auto e = checker.check(i, a, out)) errors.push_back(*e);
            else resp.actions.push_back(std::move(out));
            ++i;
        }
        if (!errors.empty()) return errors;
        return resp;
    } catch (const std::exception& e) {
        // json accessors on adversarial input; report rather than propagate
        return malformed("", std::string("unreadable response: ") + e.what());
    }
}

engine::ActionRequest to_engine_request(const AgentAction& a, const AgentContext& ctx) {
    engine::ActionRequest r;
    r.actor = ctx.participant_id;
    r.type = a.type;
    const auto& f = a.fields;
    auto cents = [](const json& v) { return static_cast<std::int64_t>(std::llround(v.get<double>() * 100.0)); };
    if (a.type == "message") {
        json to = json::array();
        const auto* schema = ctx.find_action("message");
        if (schema && schema->find("recipient")->required && f.contains("recipient")) to.push_back(f["recipient"]);
        r.args = {{"recipients", to}, {"body", f.value("content", "")}};
    } else if (a.type == "propose_trade_offer") {
        r.args = {{"target", f["target_participant"]},
                  {"offer_type", f["offer_type"]},
                  {"shape", f["shape"]},
                  {"price_cents", cents(f["price_per_unit"])}};
        if (f.contains("counter_to")) r.args["counter_to"] = f["counter_to"];
    } else if (a.type == "cancel_trade_offer") {
        r.args = {{"transaction_id", f["transaction_id"]}};
    } else if (a.type == "trade_response") {
        r.args = {{"transaction_id", f["transaction_id"]}, {"response_type", f["response_type"]}};
    } else if (a.type == "produce_shape") {
        r.args = {{"shape", f["shape"]}, {"quantity", f["quantity"]}};
    } else if (a.type == "fulfill_order") {
        r.args = {{"order_indices", f["order_indices"]}};
    } else {
        const auto* schema = ctx.find_action(a.type);
        r.args = json::object();
        for (auto& [k, v] : f.items()) {
            const auto* fs = schema ? schema->find(k) : nullptr;
            if (fs && fs->ecl_type) {
                auto parsed = value_from_json(v, *fs->ecl_type, WireStyle::Display);
                r.args[k] = parsed ? value_to_json(*parsed, WireStyle::Internal) : v;
            } else {
                r.args[k] = v;
            }
        }
    }
    if (!a.reasoning.empty()) r.args["reasoning"] = a.reasoning;
    return r;
}

json to_json(const ActionSchema& a) {
    json fields = json::array();
    for (auto& f : a.fields) {
        json j = {{"name", f.name}, {"kind", field_kind_name(f.kind)}, {"required", f.required}};
        if (!f.variants.empty()) j["enum"] = f.variants;
        if (f.min) j["min"] = *f.min;
        if (f.max) j["max"] = *f.max;
        if (!f.description.empty()) j["description"] = f.description;
        fields.push_back(j);
    }
    return {{"type", a.type}, {"description", a.description}, {"fields", fields}};
}

json to_json(const AgentContext& c) {
    json actions = json::array();
    for (auto& a : c.permitted_actions) actions.push_back(to_json(a));
    json peers = json::array();
    for (auto& p : c.peers) peers.push_back({{"participant_id", p.participant_id}, {"display_name", p.display_name}, {"group", p.group}});
    return {{"version", kWireVersion},
            {"kind", "agent_context"},
            {"session_id", c.session_id},
            {"participant_id", c.participant_id},
            {"display_name", c.display_name},
            {"group", c.group},
            {"role", c.role},
            {"experiment_rules", c.experiment_rules},
            {"permitted_actions", actions},
            {"communication_channels", c.communication_channels},
            {"perception_interval_s", static_cast<double>(c.perception_interval.ms) / 1000.0},
            {"private_state_spec", c.private_state_spec},
            {"public_state_spec", c.public_state_spec},
            {"persona_profile", c.persona_profile},
            {"peers", peers},
            {"parameters", c.parameters},
            {"message_history", c.message_history}};
}

json to_json(const StateSummary& s) {
    json failed = json::array();
    for (auto& f : s.failed_actions) failed.push_back({{"action", f.action}, {"error", f.error}});
    return {{"version", kWireVersion},
            {"kind", "state_summary"},
            {"timestamp_ms", s.timestamp_ms},
            {"remaining_s", static_cast<double>(s.remaining_ms) / 1000.0},
            {"visible_state", s.visible_state},
            {"new_messages", s.new_messages},
            {"message_history", s.message_history},
            {"pending_offers", s.pending_offers},
            {"failed_actions", failed}};
}

json to_json(const AgentResponse& r) {
    json actions = json::array();
    for (auto& a : r.actions) {
        json j = a.fields;
        j["type"] = a.type;
        if (!a.reasoning.empty()) j["reasoning"] = a.reasoning;
        actions.push_back(j);
    }
    return {{"planning", r.planning}, {"actions", actions}};
}

json to_json(const ValidationError& e) {
    json j = {{"version", kWireVersion}, {"kind", "validation_error"}, {"code", to_string(e.code)}, {"reason", e.reason}};
    if (e.action_index >= 0) j["action_index"] = e.action_index;
    if (!e.field.empty()) j["field"] = e.field;
    return j;
}

json response_json_schema(const AgentContext& c) {
    json variants = json::array();
    for (auto& a : c.permitted_actions) {
        json props = {{"type", {{"const", a.type}}}, {"reasoning", {{"type", "string"}}}};
        json required = {"type"};
        for (auto& f : a.fields) {
            json p;
            switch (f.kind) {
                case FieldKind::Integer: p = {{"type", "integer"}}; break;
                case FieldKind::Number: p = {{"type", "number"}}; break;
                case FieldKind::IndexList: p = {{"type", "array"}, {"items", {{"type", "integer"}}}}; break;
                default: p = {{"type", "string"}};
            }
            if (!f.variants.empty()) p["enum"] = f.variants;
            if (f.min && f.kind != FieldKind::IndexList && f.kind != FieldKind::String) p["minimum"] = *f.min;
            if (f.max && f.kind != FieldKind::IndexList && f.kind != FieldKind::String) p["maximum"] = *f.max;
            if (f.max && f.kind == FieldKind::String) p["maxLength"] = *f.max;
            props[f.name] = p;
            if (f.required) required.push_back(f.name);
        }
        variants.push_back({{"type", "object"}, {"properties", props}, {"required", required}, {"additionalProperties", false}});
    }
    return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
            {"$id", std::string("agora:") + std::string(kWireVersion) + ":response"},
            {"type", "object"},
            {"properties", {{"planning", {{"type", "string"}}}, {"actions", {{"type", "array"}, {"items", {{"oneOf", variants}}}}}}},
            {"required", {"actions"}}};
}

}  // namespace agora::acp
