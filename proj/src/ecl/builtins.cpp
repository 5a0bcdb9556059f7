#include "agora/ecl/builtins.hpp"

#include <algorithm>

namespace agora::ecl {

bool is_builtin_action(std::string_view name) {
    return std::find(std::begin(kBuiltinActions), std::end(kBuiltinActions), name) != std::end(kBuiltinActions);
}

std::vector<ArgDef> builtin_action_args(std::string_view action, const std::vector<std::string>& shape_types) {
    const TypeSpec shape{TypeKind::Enum, shape_types, {}};
    const auto integer = TypeSpec::of(TypeKind::Integer);
    const auto money = TypeSpec::of(TypeKind::Money);
    if (action == "message") return {{"length", integer}};
    if (action == "propose_trade_offer")
        return {{"offer_type", TypeSpec::enumeration({"buy", "sell"})}, {"shape", shape}, {"price", money}};
    if (action == "cancel_trade_offer") return {{"shape", shape}, {"price", money}};
    if (action == "trade_response")
        return {{"response_type", TypeSpec::enumeration({"accept", "decline"})}, {"shape", shape}, {"price", money}};
    if (action == "produce_shape") return {{"shape", shape}, {"quantity", integer}};
    if (action == "fulfill_order") return {{"count", integer}};
    return {};
}

std::vector<ArgDef> native_participant_attributes(const std::vector<std::string>& shape_types) {
    const TypeSpec shape{TypeKind::Enum, shape_types, {}};
    const TypeSpec shapes{TypeKind::List, shape_types, {}};
    const auto integer = TypeSpec::of(TypeKind::Integer);
    return {
        {"wealth", TypeSpec::of(TypeKind::Money)},
        {"display_name", TypeSpec::of(TypeKind::String)},
        {"group", TypeSpec::of(TypeKind::String)},
        {"specialty_shape", shape},
        {"inventory", shapes},
        {"orders", shapes},
        {"orders_fulfilled", integer},
        {"produced_count", integer},
        {"in_production", integer},
    };
}

std::optional<TypeSpec> native_participant_attribute(std::string_view name,
                                                     const std::vector<std::string>& shape_types) {
    for (auto& a : native_participant_attributes(shape_types))
        if (a.name == name) return a.type;
    return std::nullopt;
}

}  // namespace agora::ecl
