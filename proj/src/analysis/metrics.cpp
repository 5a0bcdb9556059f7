#include "agora/analysis/metrics.hpp"

#include <map>
#include <sstream>

#include <omp.h>

namespace agora::analysis {

namespace {

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::CorruptLog, "flattened table: " + why); }

// ---- CSV (RFC 4180 quoting) ----

std::string csv_field(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            if (!field.empty()) corrupt("quote inside an unquoted field");
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (quoted) corrupt("unterminated quoted field");
    if (any) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ids and list items are escaped so the list separators stay unambiguous
std::string escape_item(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '%' || c == '|' || c == ';' || c == ':') {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", static_cast<unsigned char>(c));
            out += buf;
        } else {
            out += c;
        }
    }
    return out;
}

std::string unescape_item(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%') {
            if (i + 2 >= s.size()) corrupt("bad escape");
            out += static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (s.empty()) return out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::int64_t to_int(const std::string& s, const char* column) {
    try {
        std::size_t used = 0;
        auto v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        corrupt(std::string("column ") + column + " is not an integer: " + s);
    }
}

std::optional<std::int64_t> opt_int(const std::string& s, const char* column) {
    if (s.empty()) return std::nullopt;
    return to_int(s, column);
}

std::string opt_text(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : ""; }

std::string str_of(const json& j, const char* key) {
    return j.is_object() && j.contains(key) && j[key].is_string() ? j[key].get<std::string>() : "";
}

// ---- metric accumulation shared by both routes ----

struct Tally {
    std::map<std::string, ParticipantMetrics> by_pid;
    std::map<std::string, std::int64_t> latency_sum, latency_n, length_sum;

    ParticipantMetrics& at(const std::string& pid) {
        auto& m = by_pid[pid];
        m.participant_id = pid;
        return m;
    }
    void proposed(const std::string& proposer, const std::string& target) {
        ++at(proposer).offers_proposed;
        ++at(target).offers_received;
    }
    void resolved(const std::string& proposer, const std::string& target, bool accepted, std::int64_t latency) {
        if (accepted) {
            ++at(target).accepted_responses;
            ++at(target).successful_trades;
            ++at(proposer).successful_trades;
            ++at(proposer).proposals_accepted;
        }
        latency_sum[target] += latency;
        ++latency_n[target];
    }
    void message(const std::string& sender, std::int64_t length) {
        ++at(sender).message_count;
        length_sum[sender] += length;
    }

    std::vector<ParticipantMetrics> finish(const std::vector<ParticipantSnapshot>& roster) {
        std::vector<ParticipantMetrics> out;
        for (auto& p : roster) {
            auto m = at(p.participant_id);
            m.kind = p.kind;
            m.final_wealth_cents = p.wealth_cents;
            m.orders_fulfilled = p.orders_fulfilled;
            if (m.offers_received > 0)
                m.acceptance_ratio = static_cast<double>(m.accepted_responses) / static_cast<double>(m.offers_received);
            if (m.offers_proposed > 0)
                m.trade_efficiency = static_cast<double>(m.proposals_accepted) / static_cast<double>(m.offers_proposed);
            if (m.successful_trades > 0)
                m.messages_per_successful_trade =
                    static_cast<double>(m.message_count) / static_cast<double>(m.successful_trades);
            if (m.message_count > 0)
                m.mean_message_length =
                    static_cast<double>(length_sum[p.participant_id]) / static_cast<double>(m.message_count);
            if (latency_n[p.participant_id] > 0)
                m.mean_response_latency_ms = static_cast<double>(latency_sum[p.participant_id]) /
                                             static_cast<double>(latency_n[p.participant_id]);
            out.push_back(m);
        }
        return out;
    }
};

std::vector<ParticipantSnapshot> snapshot(const engine::SessionState& s) {
    std::vector<ParticipantSnapshot> out;
    for (auto& p : s.participants)
        out.push_back({p.participant_id, std::string(to_string(p.kind)), p.wealth.cents, p.orders_fulfilled});
    return out;
}

}  // namespace

const std::vector<std::string>& flat_columns() {
    static const std::vector<std::string> cols = {
        "seq",         "ts_ms",          "actor",         "actor_kind",      "cause",          "action_type",
        "transaction_id", "offer_type",  "shape",         "price_cents",     "counterpart",    "response_type",
        "offer_status", "quantity",      "order_indices", "recipients",      "message_length", "participants"};
    return cols;
}

std::vector<FlatRow> flatten(const engine::LogHeader& header, const std::vector<engine::CommittedEvent>& events) {
    engine::replay(header, events);  // the log must be replayable
    auto participants = snapshot(engine::initial_state(header));
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < participants.size(); ++i) index[participants[i].participant_id] = i;

    std::vector<FlatRow> rows;
    rows.reserve(events.size());
    for (auto& e : events) {
        FlatRow r;
        r.seq = e.seq;
        r.ts_ms = e.ts;
        r.actor = e.actor;
        r.cause = e.cause;
        r.actor_kind = e.is_system() ? "system" : index.count(e.actor) ? participants[index[e.actor]].kind : "";
        const auto& a = e.action;
        r.action_type = str_of(a, "type");

        if (e.delta.contains("participants"))
            for (auto& [pid, changed] : e.delta["participants"].items()) {
                if (!index.count(pid)) corrupt("delta names unknown participant " + pid);
                auto& p = participants[index[pid]];
                if (changed.contains("wealth_cents")) p.wealth_cents = changed["wealth_cents"].get<std::int64_t>();
                if (changed.contains("orders_fulfilled")) p.orders_fulfilled = changed["orders_fulfilled"].get<std::int64_t>();
            }

        r.transaction_id = str_of(a, "transaction_id");
        const json* offer = nullptr;
        if (e.delta.contains("offers"))
            for (auto& o : e.delta["offers"])
                if (r.transaction_id.empty() ? str_of(o, "proposer") == e.actor
                                             : str_of(o, "transaction_id") == r.transaction_id)
                    offer = &o;
        if (offer) {
            r.transaction_id = str_of(*offer, "transaction_id");
            r.offer_type = str_of(*offer, "offer_type");
            r.shape = str_of(*offer, "shape");
            r.price_cents = (*offer)["price_cents"].get<std::int64_t>();
            r.offer_status = str_of(*offer, "status");
            r.counterpart = r.action_type == "propose_trade_offer" ? str_of(*offer, "target") : str_of(*offer, "proposer");
        }
        r.response_type = str_of(a, "response_type");
        if (r.action_type == "produce_shape") {
            r.shape = str_of(a, "shape");
            if (a.contains("quantity") && a["quantity"].is_number_integer()) r.quantity = a["quantity"].get<std::int64_t>();
        }
        if (a.contains("order_indices") && a["order_indices"].is_array())
            for (auto& i : a["order_indices"]) r.order_indices.push_back(i.get<std::int64_t>());
        if (r.action_type == "message" && e.delta.contains("messages") && !e.delta["messages"].empty()) {
            const auto& m = e.delta["messages"][0];
            r.recipients = m["recipients"].get<std::vector<std::string>>();
            r.message_length = utf8_length(m["body"].get<std::string>());
        }
        r.participants = participants;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string rows_to_csv(const std::vector<FlatRow>& rows) {
    std::ostringstream out;
    const auto& cols = flat_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (auto& r : rows) {
        std::string indices, recipients, parts;
        for (auto i : r.order_indices) indices += (indices.empty() ? "" : "|") + std::to_string(i);
        for (auto& p : r.recipients) recipients += (recipients.empty() ? "" : "|") + escape_item(p);
        for (auto& p : r.participants)
            parts += (parts.empty() ? "" : ";") + escape_item(p.participant_id) + ":" + p.kind + ":" +
                     std::to_string(p.wealth_cents) + ":" + std::to_string(p.orders_fulfilled);
        const std::vector<std::string> fields = {std::to_string(r.seq), std::to_string(r.ts_ms), r.actor, r.actor_kind,
                                                 r.cause, r.action_type, r.transaction_id, r.offer_type, r.shape,
                                                 opt_text(r.price_cents), r.counterpart, r.response_type, r.offer_status,
                                                 opt_text(r.quantity), indices, recipients,
                                                 opt_text(r.message_length), parts};
        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv_field(fields[i]);
        out << "\n";
    }
    return out.str();
}

std::vector<FlatRow> rows_from_csv(const std::string& csv) {
    auto table = parse_csv(csv);
    if (table.empty() || table[0] != flat_columns()) corrupt("missing or unexpected header");
    std::vector<FlatRow> rows;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const auto& f = table[i];
        if (f.size() != flat_columns().size()) corrupt("row " + std::to_string(i) + " has the wrong column count");
        FlatRow r;
        r.seq = to_int(f[0], "seq");
        r.ts_ms = to_int(f[1], "ts_ms");
        r.actor = f[2];
        r.actor_kind = f[3];
        r.cause = f[4];
        r.action_type = f[5];
        r.transaction_id = f[6];
        r.offer_type = f[7];
        r.shape = f[8];
        r.price_cents = opt_int(f[9], "price_cents");
        r.counterpart = f[10];
        r.response_type = f[11];
        r.offer_status = f[12];
        r.quantity = opt_int(f[13], "quantity");
        for (auto& s : split(f[14], '|')) r.order_indices.push_back(to_int(s, "order_indices"));
        for (auto& s : split(f[15], '|')) r.recipients.push_back(unescape_item(s));
        r.message_length = opt_int(f[16], "message_length");
        for (auto& s : split(f[17], ';')) {
            auto parts = split(s, ':');
            if (parts.size() != 4) corrupt("bad participants entry " + s);
            r.participants.push_back({unescape_item(parts[0]), parts[1], to_int(parts[2], "participants"),
                                      to_int(parts[3], "participants")});
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ParticipantMetrics> metrics_from_rows(const std::vector<FlatRow>& rows) {
    Tally t;
    std::map<std::string, std::pair<std::string, std::int64_t>> offered;  // tid -> (target, created ts)
    for (auto& r : rows) {
        if (r.action_type == "propose_trade_offer" && !r.transaction_id.empty()) {
            t.proposed(r.actor, r.counterpart);
            offered[r.transaction_id] = {r.counterpart, r.ts_ms};
        } else if (r.action_type == "trade_response") {
            auto it = offered.find(r.transaction_id);
            if (it == offered.end()) corrupt("response to unknown offer " + r.transaction_id);
            t.resolved(r.counterpart, r.actor, r.response_type == "accept", r.ts_ms - it->second.second);
        } else if (r.action_type == "message" && r.message_length) {
            t.message(r.actor, *r.message_length);
        }
    }
    return t.finish(rows.empty() ? std::vector<ParticipantSnapshot>{} : rows.back().participants);
}

std::vector<ParticipantMetrics> metrics_from_state(const engine::SessionState& s) {
    Tally t;
    for (auto& o : s.offers) {
        t.proposed(o.proposer, o.target);
        if (o.status == engine::OfferStatus::Accepted || o.status == engine::OfferStatus::Declined)
            t.resolved(o.proposer, o.target, o.status == engine::OfferStatus::Accepted, o.resolved_at - o.created_at);
    }
    for (auto& m : s.messages) t.message(m.sender, utf8_length(m.body));
    return t.finish(snapshot(s));
}

std::vector<ParticipantMetrics> compute_metrics(const engine::LogHeader& header,
                                                const std::vector<engine::CommittedEvent>& events) {
    if (events.empty()) return Tally{}.finish(snapshot(engine::initial_state(header)));
    return metrics_from_rows(flatten(header, events));
}

json to_json(const ParticipantMetrics& m) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"participant_id", m.participant_id},
            {"kind", m.kind},
            {"final_wealth", to_dollars(Money{m.final_wealth_cents})},
            {"final_wealth_cents", m.final_wealth_cents},
            {"successful_trades", m.successful_trades},
            {"offers_received", m.offers_received},
            {"accepted_responses", m.accepted_responses},
            {"acceptance_ratio", m.acceptance_ratio},
            {"offers_proposed", m.offers_proposed},
            {"proposals_accepted", m.proposals_accepted},
            {"trade_efficiency", opt(m.trade_efficiency)},
            {"message_count", m.message_count},
            {"messages_per_successful_trade", opt(m.messages_per_successful_trade)},
            {"mean_message_length", opt(m.mean_message_length)},
            {"mean_response_latency_ms", opt(m.mean_response_latency_ms)},
            {"orders_fulfilled", m.orders_fulfilled}};
}

std::string metrics_to_csv(const std::vector<ParticipantMetrics>& metrics) {
    std::ostringstream out;
    out << "participant_id,kind,final_wealth_cents,successful_trades,offers_received,accepted_responses,"
           "acceptance_ratio,offers_proposed,proposals_accepted,trade_efficiency,message_count,"
           "messages_per_successful_trade,mean_message_length,mean_response_latency_ms,orders_fulfilled\n";
    auto num = [](double d) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", d);
        return std::string(buf);
    };
    auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
    for (auto& m : metrics)
        out << csv_field(m.participant_id) << "," << m.kind << "," << m.final_wealth_cents << "," << m.successful_trades
            << "," << m.offers_received << "," << m.accepted_responses << "," << num(m.acceptance_ratio) << ","
            << m.offers_proposed << "," << m.proposals_accepted << "," << opt(m.trade_efficiency) << ","
            << m.message_count << "," << opt(m.messages_per_successful_trade) << "," << opt(m.mean_message_length)
            << "," << opt(m.mean_response_latency_ms) << "," << m.orders_fulfilled << "\n";
    return out.str();
}

json summarize_session(const engine::LogHeader& header, const std::vector<engine::CommittedEvent>& events,
                       const std::optional<std::string>& participant) {
    const auto rows = events.empty() ? std::vector<FlatRow>{} : flatten(header, events);
    auto metrics = events.empty() ? compute_metrics(header, events) : metrics_from_rows(rows);
    if (participant) {
        std::erase_if(metrics, [&](const ParticipantMetrics& m) { return m.participant_id != *participant; });
        if (metrics.empty()) throw Error(ErrorCode::UnknownParticipant, "no participant " + *participant);
    }
    auto wanted = [&](const std::string& pid) { return !participant || pid == *participant; };

    json per = json::array();
    for (auto& m : metrics) per.push_back(to_json(m));

    json by_kind = json::object();
    std::map<std::string, std::vector<const ParticipantMetrics*>> groups;
    for (auto& m : metrics) groups[m.kind].push_back(&m);
    for (auto& [kind, ms] : groups) {
        std::int64_t wealth = 0, trades = 0, messages = 0, fulfilled = 0;
        double ratio = 0;
        for (auto* m : ms) {
            wealth += m->final_wealth_cents;
            trades += m->successful_trades;
            messages += m->message_count;
            fulfilled += m->orders_fulfilled;
            ratio += m->acceptance_ratio;
        }
        const double n = static_cast<double>(ms.size());
        by_kind[kind] = {{"participants", ms.size()},
                         {"mean_final_wealth", to_dollars(Money{wealth}) / n},
                         {"mean_acceptance_ratio", ratio / n},
                         {"successful_trades", trades},
                         {"messages", messages},
                         {"orders_fulfilled", fulfilled}};
    }

    // chart series: (timestamp ms, value)
    json wealth_series = json::object();
    std::map<std::string, std::int64_t> last;
    auto initial = snapshot(engine::initial_state(header));
    const std::int64_t t0 = rows.empty() ? header.created_at : rows.front().ts_ms;
    for (auto& p : initial)
        if (wanted(p.participant_id)) {
            wealth_series[p.participant_id] = json::array({json::array({t0, to_dollars(Money{p.wealth_cents})})});
            last[p.participant_id] = p.wealth_cents;
        }
    json trades_series = json::array(), message_series = json::array();
    std::int64_t trades = 0, messages = 0, offers = 0;
    for (auto& r : rows) {
        for (auto& p : r.participants)
            if (wanted(p.participant_id) && last[p.participant_id] != p.wealth_cents) {
                last[p.participant_id] = p.wealth_cents;
                wealth_series[p.participant_id].push_back({r.ts_ms, to_dollars(Money{p.wealth_cents})});
            }
        const bool mine = wanted(r.actor) || wanted(r.counterpart);
        if (r.action_type == "propose_trade_offer" && mine) ++offers;
        if (r.action_type == "trade_response" && r.response_type == "accept" && mine)
            trades_series.push_back({r.ts_ms, ++trades});
        if (r.action_type == "message" && wanted(r.actor)) message_series.push_back({r.ts_ms, ++messages});
    }

    json report = {{"session_id", header.session_id},
                   {"paradigm", header.paradigm},
                   {"config_hash", header.config_hash},
                   {"events", events.size()},
                   {"participants", per},
                   {"aggregates", {{"by_kind", by_kind}, {"successful_trades", trades}, {"messages", messages},
                                   {"offers", offers}}},
                   {"series", {{"wealth", wealth_series}, {"trades", trades_series}, {"messages", message_series}}}};
    if (participant) report["filter"] = *participant;
    return report;
}

std::string render_report(const json& report) {
    std::ostringstream out;
    auto cell = [](const json& v) -> std::string {
        if (v.is_null()) return "-";
        if (v.is_number_float()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", v.get<double>());
            return buf;
        }
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    out << "session " << report.value("session_id", "") << " (" << report.value("paradigm", "") << "), "
        << report.value("events", 0) << " events\n\n";
    const std::vector<std::pair<std::string, std::string>> cols = {
        {"participant_id", "participant"}, {"kind", "kind"}, {"final_wealth", "wealth"},
        {"successful_trades", "trades"}, {"acceptance_ratio", "accept"}, {"trade_efficiency", "efficiency"},
        {"message_count", "msgs"}, {"messages_per_successful_trade", "msgs/trade"},
        {"mean_message_length", "msg len"}, {"mean_response_latency_ms", "latency ms"},
        {"orders_fulfilled", "orders"}};
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> head;
    for (auto& c : cols) head.push_back(c.second);
    table.push_back(head);
    for (auto& p : report["participants"]) {
        std::vector<std::string> row;
        for (auto& c : cols) row.push_back(cell(p[c.first]));
        table.push_back(row);
    }
    std::vector<std::size_t> width(cols.size(), 0);
    for (auto& row : table)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    for (auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << row[i] << std::string(width[i] - row[i].size(), ' ');
            out << (i + 1 < row.size() ? "  " : "\n");
        }
    }
    out << "\nby kind\n";
    for (auto& [kind, a] : report["aggregates"]["by_kind"].items())
        out << "  " << kind << ": n=" << a["participants"] << " mean wealth " << cell(a["mean_final_wealth"])
            << ", trades " << a["successful_trades"] << ", messages " << a["messages"] << "\n";
    return out.str();
}

std::vector<json> summarize_batch(const std::vector<LogInput>& logs, bool parallel) {
    std::vector<json> out(logs.size());
    const auto n = static_cast<std::int64_t>(logs.size());
    auto one = [&](std::int64_t i) {
        const auto& l = logs[static_cast<std::size_t>(i)];
        try {
            out[static_cast<std::size_t>(i)] = summarize_session(l.header, l.events);
        } catch (const std::exception& e) {
            out[static_cast<std::size_t>(i)] = {{"session_id", l.header.session_id}, {"error", e.what()}};
        }
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i) one(i);
    } else {
        for (std::int64_t i = 0; i < n; ++i) one(i);
    }
    return out;
}

}  // namespace agora::analysis
