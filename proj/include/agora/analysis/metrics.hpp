#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agora/engine/replay.hpp"

namespace agora::analysis {

struct ParticipantSnapshot {
    std::string participant_id;
    std::string kind;
    std::int64_t wealth_cents = 0;
    std::int64_t orders_fulfilled = 0;
    bool operator==(const ParticipantSnapshot&) const = default;
};

/// One row of the flattened event table. Columns that do not apply to the
/// event's action are empty in CSV and empty/nullopt here.
struct FlatRow {
    std::int64_t seq = 0;
    std::int64_t ts_ms = 0;
    std::string actor;
    std::string actor_kind;  // human, agent or system
    std::string cause;
    std::string action_type;
    std::string transaction_id;
    std::string offer_type;
    std::string shape;
    std::optional<std::int64_t> price_cents;
    /// Offer target for proposals, offer proposer for responses and cancels.
    std::string counterpart;
    std::string response_type;
    /// Status of the referenced offer after the event.
    std::string offer_status;
    std::optional<std::int64_t> quantity;
    std::vector<std::int64_t> order_indices;
    std::vector<std::string> recipients;
    std::optional<std::int64_t> message_length;  // code points
    /// Every participant after the event, in roster order.
    std::vector<ParticipantSnapshot> participants;

    bool operator==(const FlatRow&) const = default;
};

const std::vector<std::string>& flat_columns();

/// Checks the log by replaying it (Error(CorruptLog) otherwise), then derives
/// one row per event from the events and their deltas alone.
std::vector<FlatRow> flatten(const engine::LogHeader& header, const std::vector<engine::CommittedEvent>& events);

std::string rows_to_csv(const std::vector<FlatRow>& rows);
/// Inverse of rows_to_csv. Throws Error(CorruptLog) on a malformed table.
std::vector<FlatRow> rows_from_csv(const std::string& csv);

struct ParticipantMetrics {
    std::string participant_id;
    std::string kind;
    std::int64_t final_wealth_cents = 0;
    std::int64_t successful_trades = 0;
    std::int64_t offers_received = 0;
    std::int64_t accepted_responses = 0;
    double acceptance_ratio = 0;  // accepted responses / offers received; 0 when none received
    std::int64_t offers_proposed = 0;
    std::int64_t proposals_accepted = 0;
    /// Proposals accepted / offers proposed; absent with no proposals.
    std::optional<double> trade_efficiency;
    std::int64_t message_count = 0;
    std::optional<double> messages_per_successful_trade;
    std::optional<double> mean_message_length;
    std::optional<double> mean_response_latency_ms;
    std::int64_t orders_fulfilled = 0;

    bool operator==(const ParticipantMetrics&) const = default;
};

/// Metrics from flattened rows, in roster order of the last row.
std::vector<ParticipantMetrics> metrics_from_rows(const std::vector<FlatRow>& rows);
/// Metrics read off a session state (offers, messages, balances).
std::vector<ParticipantMetrics> metrics_from_state(const engine::SessionState& s);
/// Metrics of a log. A log without events reports the roster at its starting values.
std::vector<ParticipantMetrics> compute_metrics(const engine::LogHeader& header,
                                                const std::vector<engine::CommittedEvent>& events);

json to_json(const ParticipantMetrics& m);
std::string metrics_to_csv(const std::vector<ParticipantMetrics>& metrics);

/// Per-participant metrics, aggregates by kind and chart series ((ts, value)
/// pairs). With `participant`, only that participant's row and series;
/// Error(UnknownParticipant) when it is not on the roster.
json summarize_session(const engine::LogHeader& header, const std::vector<engine::CommittedEvent>& events,
                       const std::optional<std::string>& participant = std::nullopt);

/// Plain-text tables of a summarize_session report.
std::string render_report(const json& report);

struct LogInput {
    engine::LogHeader header;
    std::vector<engine::CommittedEvent> events;
};

/// summarize_session over many logs; parallel over logs with OpenMP. Failed
/// logs yield {"session_id", "error"} in their slot.
std::vector<json> summarize_batch(const std::vector<LogInput>& logs, bool parallel = true);

}  // namespace agora::analysis
