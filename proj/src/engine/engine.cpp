#include "agora/engine/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "agora/ecl/builtins.hpp"
#include "agora/ecl/eval.hpp"

namespace agora::engine {
namespace {

Denial deny(ErrorCode code, std::string message) { return Denial{code, {}, std::move(message)}; }

void checkpoint(const FaultHook& fault, std::string_view name) {
    if (fault) fault(name);
}

class EvalScope final : public ecl::Scope {
public:
    EvalScope(const SessionState& s, const ParticipantRecord& actor, const ParticipantRecord* target,
              const std::map<std::string, Value>& args, std::int64_t now)
        : s_(s), actor_(actor), target_(target), args_(args), now_(now) {}

    std::optional<Value> lookup(const ecl::AttributeRef& ref) const override {
        const auto& owner = ref.owner;
        if (owner == "param") {
            if (auto* v = s_.config->parameters.find(ref.attribute)) return *v;
            return std::nullopt;
        }
        if (owner == "session") {
            if (ref.attribute == "elapsed") return Duration{std::max<std::int64_t>(0, now_ - s_.started_at)};
            if (ref.attribute == "remaining") return Duration{s_.remaining_at(now_)};
            if (ref.attribute == "participant_count") return static_cast<std::int64_t>(s_.participants.size());
            return std::nullopt;
        }
        if (owner == "args") {
            auto it = args_.find(ref.attribute);
            if (it == args_.end()) return std::nullopt;
            return it->second;
        }
        // A bare Participant reference means the acting participant.
        if (owner == "actor" || owner == ecl::kParticipantClass) return participant_value(s_, actor_, ref.attribute);
        if (owner == "target") {
            if (!target_) return std::nullopt;
            return participant_value(s_, *target_, ref.attribute);
        }
        if (auto* cls = s_.config->find_class(owner))
            if (auto* attr = cls->find(ref.attribute)) return attr->default_value;
        return std::nullopt;
    }

private:
    const SessionState& s_;
    const ParticipantRecord& actor_;
    const ParticipantRecord* target_;
    const std::map<std::string, Value>& args_;
    std::int64_t now_;
};

/// Adds sign * amount to a numeric attribute of the record.
void adjust(ParticipantRecord& p, const std::string& attr, const Value& amount, int sign) {
    auto bad = [&] { throw Error(ErrorCode::TypeMismatch, "cannot adjust " + attr + " by this amount"); };
    if (attr == "wealth") {
        auto* m = std::get_if<Money>(&amount);
        if (!m) bad();
        p.wealth.cents += sign * m->cents;
        return;
    }
    if (attr == "produced_count") {
        auto* i = std::get_if<std::int64_t>(&amount);
        if (!i) bad();
        p.produced_count += sign * *i;
        return;
    }
    auto it = p.extras.find(attr);
    if (it == p.extras.end()) bad();
    Value& slot = it->second;
    if (auto* m = std::get_if<Money>(&slot)) {
        auto* a = std::get_if<Money>(&amount);
        if (!a) bad();
        m->cents += sign * a->cents;
    } else if (auto* d = std::get_if<Duration>(&slot)) {
        auto* a = std::get_if<Duration>(&amount);
        if (!a) bad();
        d->ms += sign * a->ms;
    } else if (auto* i = std::get_if<std::int64_t>(&slot)) {
        auto* a = std::get_if<std::int64_t>(&amount);
        if (!a) bad();
        *i += sign * *a;
    } else if (auto* x = std::get_if<double>(&slot)) {
        if (auto* a = std::get_if<double>(&amount)) *x += sign * *a;
        else if (auto* n = std::get_if<std::int64_t>(&amount)) *x += sign * static_cast<double>(*n);
        else bad();
    } else {
        bad();
    }
}

/// Everything a built-in or paradigm action needs between validation and mutation.
struct Prepared {
    std::string target;
    std::map<std::string, Value> args;
    std::function<void(SessionState&, std::int64_t now)> apply;
};

using Prep = std::variant<Prepared, Denial>;

bool is_shape(const SessionState& s, const json& j) {
    if (!j.is_string()) return false;
    auto& shapes = s.shape_types();
    return std::find(shapes.begin(), shapes.end(), j.get<std::string>()) != shapes.end();
}

std::int64_t production_time_ms(const ecl::ExperimentConfig& cfg) {
    if (auto d = cfg.parameters.duration("production_time")) return d->ms;
    if (auto* shape = cfg.find_class("Shape"))
        if (auto* t = shape->find("time_cost"))
            if (auto* d = std::get_if<Duration>(&t->default_value)) return d->ms;
    return 0;
}

std::int64_t turn_position(const SessionState& s, std::int64_t now) {
    const auto n = static_cast<std::int64_t>(s.participants.size());
    const auto timeout = std::max<std::int64_t>(1, s.controls.information_flow.turn_timeout.ms);
    const auto skipped = std::max<std::int64_t>(0, now - s.turn_started_at) / timeout;
    return (s.turn_index + skipped) % n;
}

Prep prepare_message(const SessionState& s, const ParticipantRecord& actor, const json& args, std::int64_t now) {
    const auto& flow = s.controls.information_flow;
    if (flow.chat_mode == controls::ChatMode::Disabled) return deny(ErrorCode::ChatDisabled, "chat is disabled");
    if (!args.contains("body") || !args["body"].is_string())
        return deny(ErrorCode::SchemaViolation, "message needs a body string");
    std::vector<std::string> named;
    if (args.contains("recipients")) {
        if (!args["recipients"].is_array()) return deny(ErrorCode::SchemaViolation, "recipients must be a list");
        for (auto& r : args["recipients"]) {
            if (!r.is_string()) return deny(ErrorCode::SchemaViolation, "recipients must be participant ids");
            named.push_back(r.get<std::string>());
        }
    }
    const auto body = args["body"].get<std::string>();
    const auto length = utf8_length(body);
    if (flow.max_message_length && length > *flow.max_message_length)
        return deny(ErrorCode::TooLong, "message longer than " + std::to_string(*flow.max_message_length) + " characters");
    if (flow.turn_taking && turn_holder(s, now) != actor.participant_id)
        return deny(ErrorCode::NotYourTurn, "it is " + turn_holder(s, now) + "'s turn to speak");

    for (auto& r : named)
        if (!s.find(r) || r == actor.participant_id) return deny(ErrorCode::UnknownRecipient, "unknown recipient " + r);

    std::vector<std::string> deliver;
    ChatChannel channel;
    if (flow.chat_mode == controls::ChatMode::Private) {
        if (named.size() != 1) return deny(ErrorCode::PrivateOnly, "private chat takes exactly one recipient");
        deliver = named;
        channel = ChatChannel::Private;
    } else {
        // group chat reaches every other member of the sender's group
        for (auto& p : s.participants)
            if (p.participant_id != actor.participant_id && p.group == actor.group) deliver.push_back(p.participant_id);
        channel = ChatChannel::Group;
    }

    Prepared out;
    out.args["length"] = length;
    const bool turns = flow.turn_taking;
    const auto pid = actor.participant_id;
    out.apply = [=](SessionState& next, std::int64_t at) {
        if (turns) {
            next.turn_index = (turn_position(next, at) + 1) % static_cast<std::int64_t>(next.participants.size());
            next.turn_started_at = at;
        }
        next.messages.push_back(MessageRecord{next.next_message++, at, pid, deliver, channel, body});
    };
    return out;
}

/// Controls-layer gate for a new offer. Returns the answered offer id when the
/// proposal is a counteroffer.
std::variant<std::optional<std::string>, Denial> gate_trade(const SessionState& s, const TradeOffer& draft,
                                                            const std::optional<std::string>& counter_to,
                                                            std::int64_t now) {
    const auto& act = s.controls.action_structure;
    std::optional<std::string> answered;
    if (counter_to) {
        const TradeOffer* o = s.find_offer(*counter_to);
        if (!o) return deny(ErrorCode::UnknownTransaction, "unknown transaction " + *counter_to);
        if (o->target != draft.proposer || o->proposer != draft.target)
            return deny(ErrorCode::NotAddressee, "counteroffers answer an offer addressed to you by the same target");
        if (o->status != OfferStatus::Pending) return deny(ErrorCode::AlreadyResolved, *counter_to + " is no longer pending");
        answered = o->transaction_id;
    } else {
        // a new offer on a shape the target has a pending offer on to us counters it
        for (auto& o : s.offers)
            if (o.status == OfferStatus::Pending && o.proposer == draft.target && o.target == draft.proposer &&
                o.shape == draft.shape)
                answered = o.transaction_id;
    }
    if (answered && act.negotiation == controls::Negotiation::AcceptOrReject)
        return deny(ErrorCode::CounterofferDisallowed, "counteroffers are not allowed; accept or decline " + *answered);

    if (!act.concurrent_offers_allowed)
        for (auto& o : s.offers)
            if (o.status == OfferStatus::Pending && o.proposer == draft.proposer)
                return deny(ErrorCode::ConcurrencyDenied, "resolve offer " + o.transaction_id + " before making another");

    if (auto& rate = act.max_trade_frequency) {
        std::int64_t recent = std::count_if(s.offers.begin(), s.offers.end(), [&](const TradeOffer& o) {
            return o.proposer == draft.proposer && o.created_at > now - rate->window.ms;
        });
        if (recent >= rate->count)
            return deny(ErrorCode::RateLimited, "at most " + std::to_string(rate->count) + " offers per " +
                                                    std::to_string(rate->window.ms / 1000) + "s");
    }
    return answered;
}

Prep prepare_propose(const SessionState& s, const ParticipantRecord& actor, const json& args, std::int64_t now) {
    if (!args.contains("target") || !args["target"].is_string())
        return deny(ErrorCode::SchemaViolation, "offer needs a target participant");
    const auto target = args["target"].get<std::string>();
    const ParticipantRecord* t = s.find(target);
    if (!t) return deny(ErrorCode::UnknownParticipant, "unknown participant " + target);
    if (target == actor.participant_id) return deny(ErrorCode::SelfTrade, "cannot trade with yourself");
    const auto type = args.value("offer_type", json());
    if (type != "buy" && type != "sell") return deny(ErrorCode::SchemaViolation, "offer_type must be buy or sell");
    if (!is_shape(s, args.value("shape", json()))) return deny(ErrorCode::UnknownShape, "unknown shape");
    const auto price_j = args.value("price_cents", json());
    if (!price_j.is_number_integer()) return deny(ErrorCode::SchemaViolation, "price_cents must be an integer");
    std::optional<std::string> counter_to;
    if (args.contains("counter_to") && !args["counter_to"].is_null()) {
        if (!args["counter_to"].is_string()) return deny(ErrorCode::SchemaViolation, "counter_to must be an id");
        counter_to = args["counter_to"].get<std::string>();
    }

    TradeOffer draft;
    draft.proposer = actor.participant_id;
    draft.target = target;
    draft.offer_type = type == "buy" ? OfferType::Buy : OfferType::Sell;
    draft.shape = args["shape"].get<std::string>();
    draft.price = Money{price_j.get<std::int64_t>()};
    draft.created_at = now;

    auto limits = controls::effective_price_limits(s.controls, s.config->parameters);
    if (draft.price < limits.min || draft.price > limits.max)
        return deny(ErrorCode::PriceOutOfRange,
                    "price must be between " + format_money(limits.min) + " and " + format_money(limits.max));

    auto gate = gate_trade(s, draft, counter_to, now);
    if (auto* d = std::get_if<Denial>(&gate)) return *d;
    draft.counter_to = std::get<std::optional<std::string>>(gate);

    if (s.controls.action_structure.escrow == controls::Escrow::Strict) {
        if (draft.offer_type == OfferType::Sell && actor.held(draft.shape) < 1)
            return deny(ErrorCode::ShapeNotHeld, "shape not held");
        if (draft.offer_type == OfferType::Buy && actor.wealth < draft.price)
            return deny(ErrorCode::InsufficientFunds, "not enough money for this offer");
    }

    Prepared out;
    out.target = target;
    out.args["offer_type"] = EnumValue{std::string(to_string(draft.offer_type))};
    out.args["shape"] = EnumValue{draft.shape};
    out.args["price"] = draft.price;
    out.apply = [draft](SessionState& next, std::int64_t) mutable {
        draft.transaction_id = transaction_id(next.session_id, next.next_offer++);
        next.offers.push_back(draft);
    };
    return out;
}

std::variant<const TradeOffer*, Denial> lookup_offer(const SessionState& s, const json& args) {
    if (!args.contains("transaction_id") || !args["transaction_id"].is_string())
        return deny(ErrorCode::SchemaViolation, "transaction_id must be a string");
    const auto id = args["transaction_id"].get<std::string>();
    const TradeOffer* o = s.find_offer(id);
    if (!o) return deny(ErrorCode::UnknownTransaction, "unknown transaction " + id);
    return o;
}

Prep prepare_cancel(const SessionState& s, const ParticipantRecord& actor, const json& args) {
    auto found = lookup_offer(s, args);
    if (auto* d = std::get_if<Denial>(&found)) return *d;
    const TradeOffer& o = *std::get<const TradeOffer*>(found);
    if (o.proposer != actor.participant_id) return deny(ErrorCode::NotOwner, "only the proposer can cancel " + o.transaction_id);
    if (o.status != OfferStatus::Pending)
        return deny(ErrorCode::AlreadyResolved, o.transaction_id + " is already " + std::string(to_string(o.status)));
    Prepared out;
    out.target = o.target;
    out.args["shape"] = EnumValue{o.shape};
    out.args["price"] = o.price;
    const auto id = o.transaction_id;
    out.apply = [id](SessionState& next, std::int64_t at) {
        auto* offer = next.find_offer(id);
        offer->status = OfferStatus::Cancelled;
        offer->resolved_at = at;
    };
    return out;
}

Prep prepare_response(const SessionState& s, const ParticipantRecord& actor, const json& args) {
    auto found = lookup_offer(s, args);
    if (auto* d = std::get_if<Denial>(&found)) return *d;
    const TradeOffer& o = *std::get<const TradeOffer*>(found);
    if (o.target != actor.participant_id)
        return deny(ErrorCode::NotAddressee, o.transaction_id + " is not addressed to you");
    if (o.status != OfferStatus::Pending)
        return deny(ErrorCode::AlreadyResolved, o.transaction_id + " is already " + std::string(to_string(o.status)));
    const auto response = args.value("response_type", json());
    if (response != "accept" && response != "decline")
        return deny(ErrorCode::SchemaViolation, "response_type must be accept or decline");
    const bool accept = response == "accept";
    if (accept) {
        const ParticipantRecord& seller = *s.find(o.seller());
        const ParticipantRecord& buyer = *s.find(o.buyer());
        if (seller.held(o.shape) < 1)
            return deny(ErrorCode::ShapeNotHeld, seller.participant_id + " does not hold a " + o.shape);
        if (buyer.wealth < o.price)
            return deny(ErrorCode::InsufficientFunds, buyer.participant_id + " cannot pay " + format_money(o.price));
    }
    Prepared out;
    out.target = o.proposer;
    out.args["response_type"] = EnumValue{response.get<std::string>()};
    out.args["shape"] = EnumValue{o.shape};
    out.args["price"] = o.price;
    const auto id = o.transaction_id;
    out.apply = [id, accept](SessionState& next, std::int64_t at) {
        auto* offer = next.find_offer(id);
        offer->resolved_at = at;
        if (!accept) {
            offer->status = OfferStatus::Declined;
            return;
        }
        offer->status = OfferStatus::Accepted;
        auto* seller = next.find(offer->seller());
        auto* buyer = next.find(offer->buyer());
        if (--seller->inventory[offer->shape] == 0) seller->inventory.erase(offer->shape);
        buyer->inventory[offer->shape] += 1;
        seller->wealth.cents += offer->price.cents;
        buyer->wealth.cents -= offer->price.cents;
    };
    return out;
}

Prep prepare_produce(const SessionState& s, const ParticipantRecord& actor, const json& args) {
    if (!is_shape(s, args.value("shape", json()))) return deny(ErrorCode::UnknownShape, "unknown shape");
    const auto q = args.value("quantity", json());
    if (!q.is_number_integer() || q.get<std::int64_t>() < 1)
        return deny(ErrorCode::BadQuantity, "quantity must be a positive integer");
    const auto shape = args["shape"].get<std::string>();
    const auto quantity = q.get<std::int64_t>();
    Prepared out;
    out.args["shape"] = EnumValue{shape};
    out.args["quantity"] = quantity;
    const auto pid = actor.participant_id;
    const auto per_unit = production_time_ms(*s.config);
    out.apply = [=](SessionState& next, std::int64_t at) {
        // one production line per participant: jobs queue behind each other
        std::int64_t start = at;
        for (auto& j : next.jobs)
            if (j.owner == pid) start = std::max(start, j.completes_at);
        for (std::int64_t i = 0; i < quantity; ++i) {
            next.jobs.push_back(ProductionJob{next.next_job++, pid, shape, start, start + per_unit});
            start += per_unit;
        }
    };
    return out;
}

Prep prepare_fulfill(const SessionState&, const ParticipantRecord& actor, const json& args) {
    if (!args.contains("order_indices") || !args["order_indices"].is_array())
        return deny(ErrorCode::SchemaViolation, "order_indices must be a list");
    std::vector<std::int64_t> indices;
    std::set<std::int64_t> seen;
    std::map<std::string, std::int64_t> needed;
    for (auto& x : args["order_indices"]) {
        if (!x.is_number_integer()) return deny(ErrorCode::BadIndex, "order indices must be integers");
        auto i = x.get<std::int64_t>();
        if (i < 0 || i >= static_cast<std::int64_t>(actor.orders.size()))
            return deny(ErrorCode::BadIndex, "no order line " + std::to_string(i));
        if (!seen.insert(i).second) return deny(ErrorCode::BadIndex, "order line " + std::to_string(i) + " listed twice");
        if (actor.orders[i].fulfilled)
            return deny(ErrorCode::AlreadyFulfilled, "order line " + std::to_string(i) + " is already fulfilled");
        needed[actor.orders[i].shape] += 1;
        indices.push_back(i);
    }
    for (auto& [shape, n] : needed)
        if (actor.held(shape) < n)
            return deny(ErrorCode::MissingShape, "need " + std::to_string(n) + " " + shape + ", hold " +
                                                     std::to_string(actor.held(shape)));
    Prepared out;
    out.args["count"] = static_cast<std::int64_t>(indices.size());
    const auto pid = actor.participant_id;
    out.apply = [pid, indices](SessionState& next, std::int64_t) {
        auto* p = next.find(pid);
        for (auto i : indices) {
            auto& line = p->orders[i];
            line.fulfilled = true;
            if (--p->inventory[line.shape] == 0) p->inventory.erase(line.shape);
            p->orders_fulfilled += 1;
            next.ledger.shapes_consumed += 1;
        }
    };
    return out;
}

Prep prepare_custom(const ecl::ActionDef& def, const json& args) {
    Prepared out;
    for (auto& [k, _] : args.items())
        if (k != "reasoning" && !def.find_arg(k)) return deny(ErrorCode::SchemaViolation, def.name + " has no argument " + k);
    for (auto& a : def.args) {
        if (!args.contains(a.name)) return deny(ErrorCode::SchemaViolation, def.name + " needs argument " + a.name);
        auto v = value_from_json(args[a.name], a.type);
        if (!v) return deny(ErrorCode::SchemaViolation, a.name + " must be " + describe(a.type));
        out.args[a.name] = *v;
    }
    out.apply = [](SessionState&, std::int64_t) {};
    return out;
}

/// Changed records between two states, for the event's state_delta.
json diff(const SessionState& before, const SessionState& after) {
    json delta = json::object();
    json parts = json::object();
    for (std::size_t i = 0; i < after.participants.size(); ++i) {
        const auto& a = after.participants[i];
        const auto& b = before.participants[i];
        const auto pid = a.participant_id;
        if (a == b && before.in_production(pid) == after.in_production(pid)) continue;
        json ja = participant_to_json(after, a);
        json jb = participant_to_json(before, b);
        json changed = json::object();
        for (auto& [k, v] : ja.items())
            if (jb[k] != v) changed[k] = v;
        if (!changed.empty()) parts[pid] = changed;
    }
    if (!parts.empty()) delta["participants"] = parts;

    json offers = json::array();
    for (std::size_t i = 0; i < after.offers.size(); ++i)
        if (i >= before.offers.size() || before.offers[i] != after.offers[i]) offers.push_back(offer_to_json(after.offers[i]));
    if (!offers.empty()) delta["offers"] = offers;

    std::set<std::int64_t> before_jobs, after_jobs;
    for (auto& j : before.jobs) before_jobs.insert(j.job_id);
    for (auto& j : after.jobs) after_jobs.insert(j.job_id);
    json added = json::array(), removed = json::array();
    for (auto& j : after.jobs)
        if (!before_jobs.count(j.job_id))
            added.push_back({{"job_id", j.job_id}, {"shape", j.shape}, {"owner", j.owner},
                             {"started_at", j.started_at}, {"completes_at", j.completes_at}});
    for (auto& j : before.jobs)
        if (!after_jobs.count(j.job_id)) removed.push_back(j.job_id);
    if (!added.empty()) delta["jobs_added"] = added;
    if (!removed.empty()) delta["jobs_removed"] = removed;

    json messages = json::array();
    for (std::size_t i = before.messages.size(); i < after.messages.size(); ++i)
        messages.push_back(message_to_json(after.messages[i]));
    if (!messages.empty()) delta["messages"] = messages;
    if (before.phase != after.phase) delta["phase"] = to_string(after.phase);
    return delta;
}

CommittedEvent seal(SessionState& next, const SessionState& before, std::int64_t ts, std::string actor, json action,
                    std::string cause) {
    CommittedEvent e;
    e.seq = next.next_seq++;
    e.ts = ts;
    e.actor = std::move(actor);
    e.action = std::move(action);
    e.cause = std::move(cause);
    next.now = ts;
    e.delta = diff(before, next);
    return e;
}

/// Completes due jobs, then (if `finish`) expires offers and ends the session.
void close_out(SessionState& next, std::int64_t now, std::int64_t cutoff, bool finish, const std::string& cause,
               const std::string& reason, std::vector<CommittedEvent>& events) {
    std::vector<ProductionJob> due;
    for (auto& j : next.jobs)
        if (j.completes_at <= cutoff) due.push_back(j);
    std::sort(due.begin(), due.end(), [](const ProductionJob& a, const ProductionJob& b) {
        return std::tie(a.completes_at, a.job_id) < std::tie(b.completes_at, b.job_id);
    });
    for (auto& job : due) {
        SessionState before = next;
        next.find(job.owner)->inventory[job.shape] += 1;
        next.ledger.shapes_completed += 1;
        std::erase_if(next.jobs, [&](const ProductionJob& j) { return j.job_id == job.job_id; });
        events.push_back(seal(next, before, now, std::string(CommittedEvent::kSystemActor),
                              {{"type", "production_completed"},
                               {"job_id", job.job_id},
                               {"owner", job.owner},
                               {"shape", job.shape},
                               {"completes_at", job.completes_at}},
                              cause));
    }
    if (!finish) return;
    for (std::size_t i = 0; i < next.offers.size(); ++i) {
        if (next.offers[i].status != OfferStatus::Pending) continue;
        SessionState before = next;
        next.offers[i].status = OfferStatus::Expired;
        next.offers[i].resolved_at = now;
        events.push_back(seal(next, before, now, std::string(CommittedEvent::kSystemActor),
                              {{"type", "offer_expired"}, {"transaction_id", next.offers[i].transaction_id}}, cause));
    }
    SessionState before = next;
    next.phase = Phase::Ended;
    next.jobs.clear();  // unfinished production never completes
    events.push_back(seal(next, before, now, std::string(CommittedEvent::kSystemActor),
                          {{"type", "session_ended"}, {"reason", reason}}, cause));
}

void check_clock(const SessionState& s, std::int64_t now) {
    if (now < s.now)
        throw Error(ErrorCode::ClockRegression,
                    "timestamp " + std::to_string(now) + " is behind the last event at " + std::to_string(s.now));
}

}  // namespace

std::string transaction_id(const std::string& session_id, std::int64_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%03lld", static_cast<long long>(n));
    return "S" + session_id + "-" + buf;
}

std::string turn_holder(const SessionState& s, std::int64_t now) {
    if (s.participants.empty()) return {};
    return s.participants[turn_position(s, now)].participant_id;
}

json request_to_json(const ActionRequest& r) {
    json j = r.args.is_object() ? r.args : json::object();
    j["type"] = r.type;
    return {{"actor", r.actor}, {"action", j}};
}

ActionRequest request_from_json(const json& j) {
    ActionRequest r;
    r.actor = j.at("actor").get<std::string>();
    r.args = j.at("action");
    r.type = r.args.at("type").get<std::string>();
    r.args.erase("type");
    return r;
}

json event_to_json(const CommittedEvent& e) {
    json j = {{"seq", e.seq}, {"ts", e.ts}, {"actor", e.actor}, {"action", e.action}, {"delta", e.delta}};
    if (!e.cause.empty()) j["cause"] = e.cause;
    return j;
}

CommittedEvent event_from_json(const json& j) {
    auto bad = [](const std::string& why) { throw Error(ErrorCode::CorruptLog, "malformed event: " + why); };
    if (!j.is_object()) bad("not an object");
    if (!j.contains("seq") || !j["seq"].is_number_integer()) bad("seq");
    if (!j.contains("ts") || !j["ts"].is_number_integer()) bad("ts");
    if (!j.contains("actor") || !j["actor"].is_string()) bad("actor");
    if (!j.contains("action") || !j["action"].is_object() || !j["action"].contains("type") ||
        !j["action"]["type"].is_string())
        bad("action");
    CommittedEvent e;
    e.seq = j["seq"].get<std::int64_t>();
    e.ts = j["ts"].get<std::int64_t>();
    e.actor = j["actor"].get<std::string>();
    e.action = j["action"];
    e.delta = j.value("delta", json::object());
    if (j.contains("cause")) {
        if (!j["cause"].is_string()) bad("cause");
        e.cause = j["cause"].get<std::string>();
    }
    return e;
}

SessionState instantiate_session(std::shared_ptr<const ecl::ExperimentConfig> config,
                                 controls::InteractionControls ctl, const std::vector<RosterEntry>& roster,
                                 std::string session_id, std::uint64_t seed) {
    const auto& params = config->parameters;
    if (roster.empty() || static_cast<std::int64_t>(roster.size()) != params.participant_count())
        throw Error(ErrorCode::RosterMismatch, "roster has " + std::to_string(roster.size()) + " seats, paradigm needs " +
                                                   std::to_string(params.participant_count()));
    std::set<std::string> ids;
    for (auto& r : roster) {
        if (r.participant_id.empty() || r.participant_id == CommittedEvent::kSystemActor)
            throw Error(ErrorCode::RosterMismatch, "invalid participant id '" + r.participant_id + "'");
        if (!ids.insert(r.participant_id).second)
            throw Error(ErrorCode::DuplicateRoster, "participant id " + r.participant_id + " appears twice");
        if (!config->has_role(r.role)) throw Error(ErrorCode::UnknownRole, "unknown role " + r.role);
    }

    auto problems = controls::check_controls(ctl, *config);
    for (auto& [pid, _] : ctl.social_framing.agent_display_names) {
        auto it = std::find_if(roster.begin(), roster.end(), [&](const RosterEntry& r) { return r.participant_id == pid; });
        if (it == roster.end() || it->kind != ParticipantKind::Agent)
            problems.push_back("display name given for " + pid + ", which is not an agent seat");
    }
    std::set<std::string> shown;
    for (auto& r : roster) {
        auto it = ctl.social_framing.agent_display_names.find(r.participant_id);
        const auto& name = it != ctl.social_framing.agent_display_names.end() ? it->second : r.display_name;
        if (!shown.insert(name).second) problems.push_back("display name \"" + name + "\" is not unique");
    }
    if (!problems.empty()) {
        std::string msg;
        for (auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
        throw Error(ErrorCode::InvalidControls, msg);
    }

    SessionState s;
    s.session_id = std::move(session_id);
    s.controls = std::move(ctl);
    s.seed = seed;
    const auto shapes = config->shape_types();
    s.set_shape_types(shapes);
    const auto per_order = params.integer("shape_amount_per_order").value_or(0);
    const ecl::ObjectClass* cls = config->find_class(ecl::kParticipantClass);

    for (std::size_t i = 0; i < roster.size(); ++i) {
        const auto& r = roster[i];
        ParticipantRecord p;
        p.participant_id = r.participant_id;
        p.kind = r.kind;
        p.display_name = r.display_name.empty() ? r.participant_id : r.display_name;
        p.group = r.group;
        p.role = r.role;
        p.persona_profile = r.persona_profile;
        p.wealth = params.starting_money();
        if (cls)
            for (auto& a : cls->attributes)
                if (!ecl::native_participant_attribute(a.name, shapes)) p.extras[a.name] = a.default_value;
        if (!shapes.empty()) {
            p.specialty_shape = shapes[i % shapes.size()];
            std::vector<std::string> choices;
            for (auto& sh : shapes)
                if (sh != p.specialty_shape) choices.push_back(sh);
            if (!choices.empty()) {
                auto stream = SeededStream::derive(seed, "orders:" + p.participant_id);
                for (std::int64_t k = 0; k < per_order; ++k) {
                    auto pick = stream.uniform(0, static_cast<std::int64_t>(choices.size()) - 1);
                    p.orders.push_back(OrderLine{k, choices[pick], false});
                }
            }
        }
        s.participants.push_back(std::move(p));
    }
    s.config = std::move(config);
    return s;
}

Transition start_session(const SessionState& s, std::int64_t now) {
    if (s.phase != Phase::Created)
        throw Error(ErrorCode::WrongPhase, "session is " + std::string(to_string(s.phase)) + ", not created");
    check_clock(s, now);
    Transition t{s, {}};
    t.state.phase = Phase::Live;
    t.state.started_at = now;
    t.state.turn_index = 0;
    t.state.turn_started_at = now;
    t.events.push_back(seal(t.state, s, now, std::string(CommittedEvent::kSystemActor),
                            {{"type", "session_started"},
                             {"started_at", now},
                             {"ends_at", now + s.config->parameters.session_duration().ms}},
                            "start"));
    return t;
}

Transition tick(const SessionState& s, std::int64_t now) {
    check_clock(s, now);
    Transition t{s, {}};
    if (s.phase != Phase::Live) return t;
    const auto end = s.session_end();
    close_out(t.state, now, std::min(now, end), now >= end, "tick", "timer", t.events);
    return t;
}

Transition end_session(const SessionState& s, std::int64_t now) {
    if (s.phase != Phase::Live)
        throw Error(ErrorCode::WrongPhase, "session is " + std::string(to_string(s.phase)) + ", not live");
    check_clock(s, now);
    Transition t{s, {}};
    close_out(t.state, now, std::min(now, s.session_end()), true, "command", "command", t.events);
    return t;
}

ActionResult apply_action(const SessionState& s, const ActionRequest& req, std::int64_t now, const FaultHook& fault) {
    check_clock(s, now);
    if (s.phase == Phase::Created) return deny(ErrorCode::WrongPhase, "the session has not started");
    if (s.phase == Phase::Ended) return deny(ErrorCode::SessionEnded, "the session has ended");
    const ParticipantRecord* actor = s.find(req.actor);
    if (!actor) return deny(ErrorCode::UnknownActor, "unknown participant " + req.actor);
    if (now >= s.session_end()) return deny(ErrorCode::SessionEnded, "the session time is up");
    const ecl::ActionDef* def = s.config->find_action(req.type);
    if (!def) return deny(ErrorCode::UnknownAction, "this paradigm has no action " + req.type);
    if (def->actor_role != actor->role)
        return deny(ErrorCode::UnknownAction, req.type + " is not available to role " + actor->role);
    if (!req.args.is_object()) return deny(ErrorCode::SchemaViolation, "action arguments must be an object");

    Prep prep = req.type == "message"               ? prepare_message(s, *actor, req.args, now)
                : req.type == "propose_trade_offer" ? prepare_propose(s, *actor, req.args, now)
                : req.type == "cancel_trade_offer"  ? prepare_cancel(s, *actor, req.args)
                : req.type == "trade_response"      ? prepare_response(s, *actor, req.args)
                : req.type == "produce_shape"       ? prepare_produce(s, *actor, req.args)
                : req.type == "fulfill_order"       ? prepare_fulfill(s, *actor, req.args)
                                                    : prepare_custom(*def, req.args);
    if (auto* d = std::get_if<Denial>(&prep)) return *d;
    auto& p = std::get<Prepared>(prep);

    const ParticipantRecord* target = p.target.empty() ? nullptr : s.find(p.target);
    EvalScope scope(s, *actor, target, p.args, now);
    for (auto& name : def->required_policies) {
        const ecl::PolicyDef* policy = s.config->find_policy(name);
        if (policy && !ecl::evaluate_predicate(policy->predicate, scope))
            return Denial{ErrorCode::PolicyDenied, policy->name, policy->deny_message};
    }
    for (auto& policy : s.config->policies)
        if (policy.kind == ecl::PolicyKind::GlobalRule && !ecl::evaluate_predicate(policy.predicate, scope))
            return Denial{ErrorCode::PolicyDenied, policy.name, policy.deny_message};

    // costs and effects are evaluated on the pre-state, then applied to the copy
    std::vector<std::pair<std::string, Value>> costs, effects;
    for (auto& c : def->costs) costs.emplace_back(c.target.attribute, ecl::evaluate(c.amount, scope));
    for (auto& e : def->effects) effects.emplace_back(e.target.attribute, ecl::evaluate(e.amount, scope));

    SessionState next = s;
    checkpoint(fault, "begin");
    p.apply(next, now);
    checkpoint(fault, "mechanics");
    ParticipantRecord& a = *next.find(req.actor);
    for (auto& [attr, amount] : costs) {
        adjust(a, attr, amount, -1);
        if (attr == "wealth") next.ledger.costs_paid.cents += std::get<Money>(amount).cents;
    }
    checkpoint(fault, "costs");
    for (auto& [attr, amount] : effects) {
        adjust(a, attr, amount, +1);
        if (attr == "wealth") next.ledger.incentives_earned.cents += std::get<Money>(amount).cents;
    }
    checkpoint(fault, "effects");
    for (auto& rec : next.participants)
        if (rec.wealth.cents < 0)
            return deny(ErrorCode::InsufficientFunds, rec.participant_id == req.actor
                                                          ? "not enough money"
                                                          : rec.participant_id + " cannot cover this action");

    json action = req.args;
    action["type"] = req.type;
    Commit c{std::move(next), {}};
    c.event = seal(c.state, s, now, req.actor, std::move(action), {});
    checkpoint(fault, "seal");
    return c;
}

}  // namespace agora::engine
