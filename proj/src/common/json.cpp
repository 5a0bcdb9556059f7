#include "agora/common/json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace agora {

json value_to_json(const Value& v, WireStyle style) {
    struct Visitor {
        WireStyle style;
        json operator()(std::int64_t i) const { return i; }
        json operator()(double d) const { return d; }
        json operator()(bool b) const { return b; }
        json operator()(const std::string& s) const { return s; }
        json operator()(Money m) const {
            if (style == WireStyle::Display) return to_dollars(m);
            return m.cents;
        }
        json operator()(Duration d) const {
            if (style == WireStyle::Display) return static_cast<double>(d.ms) / 1000.0;
            return d.ms;
        }
        json operator()(const EnumValue& e) const { return e.variant; }
        json operator()(const ListValue& l) const { return l.items; }
    };
    return std::visit(Visitor{style}, v);
}

std::optional<Value> value_from_json(const json& j, const TypeSpec& type, WireStyle style) {
    auto in_domain = [&](const std::string& v) {
        return std::find(type.variants.begin(), type.variants.end(), v) != type.variants.end();
    };
    switch (type.kind) {
        case TypeKind::Integer:
            if (j.is_number_integer()) return j.get<std::int64_t>();
            return std::nullopt;
        case TypeKind::Decimal:
            if (j.is_number()) return j.get<double>();
            return std::nullopt;
        case TypeKind::Boolean:
            if (j.is_boolean()) return j.get<bool>();
            return std::nullopt;
        case TypeKind::String:
            if (j.is_string()) return j.get<std::string>();
            return std::nullopt;
        case TypeKind::Enum:
            if (j.is_string() && in_domain(j.get<std::string>())) return EnumValue{j.get<std::string>()};
            return std::nullopt;
        case TypeKind::Money:
            if (style == WireStyle::Display) {
                if (j.is_number()) return money_from_dollars(j.get<double>());
                return std::nullopt;
            }
            if (j.is_number_integer()) return Money{j.get<std::int64_t>()};
            return std::nullopt;
        case TypeKind::Duration:
            if (style == WireStyle::Display) {
                if (j.is_number()) return Duration{static_cast<std::int64_t>(std::llround(j.get<double>() * 1000.0))};
                return std::nullopt;
            }
            if (j.is_number_integer()) return Duration{j.get<std::int64_t>()};
            return std::nullopt;
        case TypeKind::List: {
            if (!j.is_array()) return std::nullopt;
            ListValue l;
            for (auto& x : j) {
                if (!x.is_string() || !in_domain(x.get<std::string>())) return std::nullopt;
                l.items.push_back(x.get<std::string>());
            }
            return l;
        }
    }
    return std::nullopt;
}

std::string safe_dump(const json& j, int indent) {
    return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

std::string fnv1a64_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::int64_t utf8_length(std::string_view s) {
    return std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; });
}

}  // namespace agora
