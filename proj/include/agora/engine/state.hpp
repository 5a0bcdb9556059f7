#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agora/common/json.hpp"
#include "agora/common/kinds.hpp"
#include "agora/common/value.hpp"
#include "agora/controls/controls.hpp"
#include "agora/ecl/config.hpp"

namespace agora::engine {

struct RosterEntry {
    std::string participant_id;
    ParticipantKind kind = ParticipantKind::Human;
    std::string display_name;
    std::string group = "default";
    std::string role = "participant";
    std::optional<std::string> persona_profile;

    bool operator==(const RosterEntry&) const = default;
};

json roster_entry_to_json(const RosterEntry& r);
RosterEntry roster_entry_from_json(const json& j);

struct OrderLine {
    std::int64_t index = 0;
    std::string shape;
    bool fulfilled = false;
    bool operator==(const OrderLine&) const = default;
};

struct ParticipantRecord {
    std::string participant_id;
    ParticipantKind kind = ParticipantKind::Human;
    std::string display_name;
    std::string group;
    std::string role;
    std::optional<std::string> persona_profile;
    Money wealth;
    std::string specialty_shape;
    /// shape -> count; zero counts are erased.
    std::map<std::string, std::int64_t> inventory;
    std::vector<OrderLine> orders;
    std::int64_t orders_fulfilled = 0;
    std::int64_t produced_count = 0;
    /// Participant attributes the paradigm declares beyond the native ones.
    std::map<std::string, Value> extras;

    std::int64_t held(const std::string& shape) const;
    bool operator==(const ParticipantRecord&) const = default;
};

enum class OfferType { Buy, Sell };
enum class OfferStatus { Pending, Accepted, Declined, Cancelled, Expired };
std::string_view to_string(OfferType t);
std::string_view to_string(OfferStatus s);

struct TradeOffer {
    std::string transaction_id;
    std::string proposer;
    std::string target;
    OfferType offer_type = OfferType::Sell;
    std::string shape;
    Money price;
    OfferStatus status = OfferStatus::Pending;
    std::int64_t created_at = 0;
    std::int64_t resolved_at = 0;
    /// Transaction this offer answers, when it is a counteroffer.
    std::optional<std::string> counter_to;

    const std::string& buyer() const { return offer_type == OfferType::Buy ? proposer : target; }
    const std::string& seller() const { return offer_type == OfferType::Sell ? proposer : target; }
    bool operator==(const TradeOffer&) const = default;
};

struct ProductionJob {
    std::int64_t job_id = 0;
    std::string owner;
    std::string shape;
    std::int64_t started_at = 0;
    std::int64_t completes_at = 0;
    bool operator==(const ProductionJob&) const = default;
};

enum class ChatChannel { Private, Group };

struct MessageRecord {
    std::int64_t message_id = 0;
    std::int64_t ts = 0;
    std::string sender;
    std::vector<std::string> recipients;
    ChatChannel channel = ChatChannel::Private;
    std::string body;
    bool operator==(const MessageRecord&) const = default;
};

enum class Phase { Created, Live, Ended };
std::string_view to_string(Phase p);

/// Running totals that close the money and shape balances.
struct Ledger {
    Money costs_paid;
    Money incentives_earned;
    std::int64_t shapes_completed = 0;
    std::int64_t shapes_consumed = 0;
    bool operator==(const Ledger&) const = default;
};

struct SessionState {
    std::string session_id;
    std::shared_ptr<const ecl::ExperimentConfig> config;
    controls::InteractionControls controls;
    std::uint64_t seed = 0;

    std::vector<ParticipantRecord> participants;  // roster order
    std::vector<TradeOffer> offers;               // every offer ever made, in creation order
    std::vector<ProductionJob> jobs;              // unfinished jobs
    std::vector<MessageRecord> messages;

    Phase phase = Phase::Created;
    std::int64_t started_at = 0;
    /// Timestamp of the last committed event; the clock never moves behind it.
    std::int64_t now = 0;
    std::int64_t next_seq = 1;
    std::int64_t next_offer = 1;
    std::int64_t next_job = 1;
    std::int64_t next_message = 1;
    Ledger ledger;

    std::int64_t turn_index = 0;
    std::int64_t turn_started_at = 0;

    const ParticipantRecord* find(const std::string& pid) const;
    ParticipantRecord* find(const std::string& pid);
    const TradeOffer* find_offer(const std::string& id) const;
    TradeOffer* find_offer(const std::string& id);

    std::int64_t session_end() const { return started_at + config->parameters.session_duration().ms; }
    /// Remaining session time at `at`, clamped to >= 0. Full duration before start.
    std::int64_t remaining_at(std::int64_t at) const;
    std::int64_t in_production(const std::string& pid) const;
    const std::vector<std::string>& shape_types() const { return shapes_; }

    void set_shape_types(std::vector<std::string> s) { shapes_ = std::move(s); }

private:
    std::vector<std::string> shapes_;
};

/// The participant attribute `attr` as an ECL value, including derived ones
/// (inventory as a sorted list, orders as the unfulfilled lines, in_production).
std::optional<Value> participant_value(const SessionState& s, const ParticipantRecord& p, const std::string& attr);

/// Canonical JSON of the full state (config excluded). Equal states dump to
/// identical bytes, which replay and recovery checks rely on.
json state_to_json(const SessionState& s);

json participant_to_json(const SessionState& s, const ParticipantRecord& p);
json offer_to_json(const TradeOffer& o);
json message_to_json(const MessageRecord& m);

/// Sum of all wealth; with the ledger this closes the money balance.
Money total_wealth(const SessionState& s);
std::int64_t total_shapes(const SessionState& s);

}  // namespace agora::engine
