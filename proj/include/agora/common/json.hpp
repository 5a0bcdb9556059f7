#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "agora/common/value.hpp"

namespace agora {

using json = nlohmann::json;

/// Wire style for values leaving the process.
/// Internal: money as integer cents, durations as integer ms (event logs, registry).
/// Display: money as dollars, durations as seconds (participant and agent payloads).
enum class WireStyle { Internal, Display };

json value_to_json(const Value& v, WireStyle style = WireStyle::Internal);

/// Inverse of value_to_json for a known type; nullopt when `j` does not
/// conform (wrong JSON kind, unknown enum variant, fractional cents).
std::optional<Value> value_from_json(const json& j, const TypeSpec& type, WireStyle style = WireStyle::Internal);

/// Dump that never throws on invalid UTF-8 (bytes are replaced).
std::string safe_dump(const json& j, int indent = -1);

/// Unicode code points in UTF-8 text; message lengths count characters.
std::int64_t utf8_length(std::string_view s);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view data);

}  // namespace agora
