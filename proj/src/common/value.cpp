#include "agora/common/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace agora {

std::string to_string(TypeKind kind) {
    switch (kind) {
        case TypeKind::Integer: return "integer";
        case TypeKind::Decimal: return "decimal";
        case TypeKind::String: return "string";
        case TypeKind::Boolean: return "boolean";
        case TypeKind::Enum: return "enum";
        case TypeKind::Duration: return "duration";
        case TypeKind::Money: return "money";
        case TypeKind::List: return "list";
    }
    return "?";
}

std::string describe(const TypeSpec& type) {
    if (!type.alias.empty()) {
        return type.kind == TypeKind::List ? "list(" + type.alias + ")" : type.alias;
    }
    if (type.kind == TypeKind::Enum || type.kind == TypeKind::List) {
        std::string s = "enum(";
        for (std::size_t i = 0; i < type.variants.size(); ++i) {
            if (i) s += ", ";
            s += type.variants[i];
        }
        s += ")";
        return type.kind == TypeKind::List ? "list(" + s + ")" : s;
    }
    return to_string(type.kind);
}

bool conforms(const Value& v, const TypeSpec& type) {
    auto in_domain = [&](const std::string& s) {
        return std::find(type.variants.begin(), type.variants.end(), s) != type.variants.end();
    };
    switch (type.kind) {
        case TypeKind::Integer: return std::holds_alternative<std::int64_t>(v);
        case TypeKind::Decimal: return std::holds_alternative<double>(v);
        case TypeKind::String: return std::holds_alternative<std::string>(v);
        case TypeKind::Boolean: return std::holds_alternative<bool>(v);
        case TypeKind::Duration: return std::holds_alternative<Duration>(v);
        case TypeKind::Money: return std::holds_alternative<Money>(v);
        case TypeKind::Enum: {
            auto* e = std::get_if<EnumValue>(&v);
            return e && in_domain(e->variant);
        }
        case TypeKind::List: {
            auto* l = std::get_if<ListValue>(&v);
            return l && std::all_of(l->items.begin(), l->items.end(), in_domain);
        }
    }
    return false;
}

std::string format_dollars(Money m) {
    std::int64_t c = m.cents;
    std::string sign = c < 0 ? "-" : "";
    std::int64_t a = c < 0 ? -c : c;
    std::string whole = std::to_string(a / 100);
    std::int64_t frac = a % 100;
    if (frac == 0) return sign + whole;
    std::string f = std::to_string(frac);
    if (f.size() < 2) f = "0" + f;
    return sign + whole + "." + f;
}

std::string format_money(Money m) {
    if (m.cents < 0) return "-$" + format_dollars(Money{-m.cents});
    return "$" + format_dollars(m);
}

std::string format_duration(Duration d) {
    if (d.ms % 1000 == 0) return std::to_string(d.ms / 1000) + "s";
    return std::to_string(d.ms) + "ms";
}

std::string format_decimal(double d) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string display(const Value& v) {
    struct Visitor {
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_decimal(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(Money m) const { return format_money(m); }
        std::string operator()(Duration d) const { return format_duration(d); }
        std::string operator()(const EnumValue& e) const { return e.variant; }
        std::string operator()(const ListValue& l) const {
            std::string s = "[";
            for (std::size_t i = 0; i < l.items.size(); ++i) {
                if (i) s += ", ";
                s += l.items[i];
            }
            return s + "]";
        }
    };
    return std::visit(Visitor{}, v);
}

Money money_from_dollars(double dollars) { return Money{static_cast<std::int64_t>(std::llround(dollars * 100.0))}; }

double to_dollars(Money m) { return static_cast<double>(m.cents) / 100.0; }

}  // namespace agora
