#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agora/ecl/config.hpp"

namespace agora::ecl {

/// Action names the engine executes natively. Their ECL definitions supply
/// costs, effects and preconditions; the engine supplies the mechanics
/// (inventory moves, trade settlement, order bookkeeping, message routing).
inline constexpr std::string_view kBuiltinActions[] = {"message",       "propose_trade_offer", "cancel_trade_offer",
                                                       "trade_response", "produce_shape",       "fulfill_order"};

bool is_builtin_action(std::string_view name);

/// Arguments the engine binds for a built-in action. A built-in's declared
/// args must be a subset of these (same names, compatible types).
std::vector<ArgDef> builtin_action_args(std::string_view action, const std::vector<std::string>& shape_types);

/// Participant attributes the engine keeps natively. If the Participant class
/// declares one of these names, the declared type must match.
std::vector<ArgDef> native_participant_attributes(const std::vector<std::string>& shape_types);

std::optional<TypeSpec> native_participant_attribute(std::string_view name, const std::vector<std::string>& shape_types);

}  // namespace agora::ecl
