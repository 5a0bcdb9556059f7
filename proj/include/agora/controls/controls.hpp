#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agora/common/json.hpp"
#include "agora/common/kinds.hpp"
#include "agora/common/rng.hpp"
#include "agora/common/value.hpp"
#include "agora/ecl/config.hpp"

namespace agora::controls {

enum class ChatMode { Private, Group, Disabled };
enum class Granularity { Exact, Summary };
enum class Negotiation { AcceptOrReject, OpenWithCounteroffers };
enum class LatencyKind { Immediate, Fixed, Uniform };
enum class Explanations { Proactive, OnDemand, None };
/// When offers must be backed. Funds and shapes are always checked when an
/// offer is accepted; Strict also checks them when the offer is proposed.
enum class Escrow { AtAcceptance, Strict };

struct DashboardAudience {
    enum class Kind { All, Humans, Agents, Group };
    Kind kind = Kind::All;
    std::string group;

    bool matches(ParticipantKind viewer_kind, const std::string& viewer_group) const;
    bool operator==(const DashboardAudience&) const = default;
};

struct InfoFlow {
    bool dashboard_enabled = true;
    DashboardAudience dashboard_audience;
    /// Participant attribute names; empty means every attribute bound in the dashboard view.
    std::vector<std::string> dashboard_fields;
    /// How often clients receive dashboard refreshes. Delivery rate only; values are always current.
    Duration update_interval{1000};
    Granularity granularity = Granularity::Exact;
    ChatMode chat_mode = ChatMode::Private;
    bool turn_taking = false;
    Duration turn_timeout{30000};
    std::optional<std::int64_t> max_message_length;

    bool operator==(const InfoFlow&) const = default;
};

struct RateLimit {
    std::int64_t count = 0;
    Duration window;
    bool operator==(const RateLimit&) const = default;
};

struct PriceLimits {
    Money min;
    Money max;
    bool operator==(const PriceLimits&) const = default;
};

struct ActionStructure {
    Negotiation negotiation = Negotiation::OpenWithCounteroffers;
    std::optional<PriceLimits> price_limits;
    std::optional<RateLimit> max_trade_frequency;
    bool concurrent_offers_allowed = true;
    Escrow escrow = Escrow::AtAcceptance;

    bool operator==(const ActionStructure&) const = default;
};

struct SocialFraming {
    std::map<std::string, std::string> agent_display_names;
    bool persona_visible = false;
    std::map<std::string, std::string> group_cues;

    bool operator==(const SocialFraming&) const = default;
};

struct Latency {
    LatencyKind kind = LatencyKind::Immediate;
    Duration fixed;
    Duration min;
    Duration max;
    bool operator==(const Latency&) const = default;
};

struct AgentResponsiveness {
    Latency latency;
    /// Shown to counterparts for the scheduled latency window.
    bool typing_indicator = false;
    bool adaptive_feedback = true;
    Explanations explanations = Explanations::None;
    std::optional<Duration> perception_interval;

    bool operator==(const AgentResponsiveness&) const = default;
};

struct InteractionControls {
    InfoFlow information_flow;
    ActionStructure action_structure;
    SocialFraming social_framing;
    AgentResponsiveness agent_responsiveness;

    bool operator==(const InteractionControls&) const = default;
};

/// All four layers must be present; unknown keys are rejected, missing keys
/// inside a layer take their defaults. Throws Error(InvalidControls).
InteractionControls controls_from_json(const json& j);
json controls_to_json(const InteractionControls& c);
InteractionControls load_controls_file(const std::string& path);

/// Problems with the controls against a paradigm (empty when acceptable).
std::vector<std::string> check_controls(const InteractionControls& c, const ecl::ExperimentConfig& config);

/// Effective trading price bounds: the paradigm's range narrowed by the override.
PriceLimits effective_price_limits(const InteractionControls& c, const ecl::ParadigmParameters& p);

Duration effective_perception_interval(const InteractionControls& c, const ecl::ParadigmParameters& p);

/// deliver_at for an agent action decided at `now`. Uniform draws consume one
/// value from `stream`, so a replay with the same seed yields the same schedule.
std::int64_t schedule_agent_action(const InteractionControls& c, std::int64_t now, SeededStream& stream);

/// Quartile band of `value` within [lo, hi]: "low", "medium", "high", "very high".
/// A degenerate range (lo == hi) is "medium".
std::string band_label(double value, double lo, double hi);

std::string_view to_string(ChatMode m);
std::string_view to_string(Granularity g);
std::string_view to_string(Negotiation n);

}  // namespace agora::controls
