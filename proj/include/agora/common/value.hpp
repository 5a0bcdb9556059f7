#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace agora {

/// Money in integer minor units (cents).
struct Money {
    std::int64_t cents = 0;
    auto operator<=>(const Money&) const = default;
};

/// Durations are stored in milliseconds; ECL literals are written in s/ms/m.
struct Duration {
    std::int64_t ms = 0;
    auto operator<=>(const Duration&) const = default;
};

struct EnumValue {
    std::string variant;
    auto operator<=>(const EnumValue&) const = default;
};

/// Ordered list of enum variants (inventories, order lists).
struct ListValue {
    std::vector<std::string> items;
    auto operator<=>(const ListValue&) const = default;
};

using Value = std::variant<std::int64_t, double, bool, std::string, Money, Duration, EnumValue, ListValue>;

enum class TypeKind { Integer, Decimal, String, Boolean, Enum, Duration, Money, List };

/// Semantic type of an attribute, argument, parameter or expression.
/// Enum and List carry their variant domain. `alias` records the
/// `Class.attribute` form the type was declared with so it serializes back.
struct TypeSpec {
    TypeKind kind = TypeKind::Integer;
    std::vector<std::string> variants;
    std::string alias;

    static TypeSpec of(TypeKind k) { return TypeSpec{k, {}, {}}; }
    static TypeSpec enumeration(std::vector<std::string> v) { return TypeSpec{TypeKind::Enum, std::move(v), {}}; }

    bool is_numeric() const {
        return kind == TypeKind::Integer || kind == TypeKind::Decimal || kind == TypeKind::Money ||
               kind == TypeKind::Duration;
    }
    /// Same kind and, for enums/lists, the same variant domain.
    bool compatible(const TypeSpec& other) const { return kind == other.kind && variants == other.variants; }

    bool operator==(const TypeSpec& o) const {
        return kind == o.kind && variants == o.variants && alias == o.alias;
    }
};

std::string to_string(TypeKind kind);
std::string describe(const TypeSpec& type);

/// True when `v` is a legal value of `type` (enum variant membership included).
bool conforms(const Value& v, const TypeSpec& type);

/// "$12.50" style rendering; whole dollars drop the fraction ("$200").
std::string format_money(Money m);
/// Dollar amount without the leading '$'.
std::string format_dollars(Money m);
/// Canonical ECL rendering of a duration: "15s" when whole seconds, otherwise "1500ms".
std::string format_duration(Duration d);

/// Round-trip exact rendering of a double that always reads back as a decimal.
std::string format_decimal(double d);

/// Human readable rendering used in prompts and reports.
std::string display(const Value& v);

/// Dollars (as agents and participant clients send them) to cents, rounded to nearest.
Money money_from_dollars(double dollars);
double to_dollars(Money m);

}  // namespace agora
