#pragma once

#include <optional>
#include <string_view>

namespace agora {

enum class ParticipantKind { Human, Agent };

inline std::string_view to_string(ParticipantKind k) { return k == ParticipantKind::Human ? "human" : "agent"; }

inline std::optional<ParticipantKind> participant_kind_from_string(std::string_view s) {
    if (s == "human") return ParticipantKind::Human;
    if (s == "agent") return ParticipantKind::Agent;
    return std::nullopt;
}

}  // namespace agora
