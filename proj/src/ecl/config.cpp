#include "agora/ecl/config.hpp"

#include <algorithm>

namespace agora::ecl {

std::string_view op_symbol(Op op) {
    switch (op) {
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Eq: return "==";
        case Op::Ne: return "!=";
        case Op::Lt: return "<";
        case Op::Le: return "<=";
        case Op::Gt: return ">";
        case Op::Ge: return ">=";
        case Op::And: return "and";
        case Op::Or: return "or";
        case Op::Not: return "not";
        case Op::Neg: return "-";
    }
    return "?";
}

bool Expr::operator==(const Expr& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case ExprKind::Literal: return literal == o.literal;
        case ExprKind::EnumLiteral: return name == o.name;
        case ExprKind::ListLiteral: return operands == o.operands;
        case ExprKind::Ref: return ref == o.ref;
        case ExprKind::Unary:
        case ExprKind::Binary: return op == o.op && operands == o.operands;
        case ExprKind::If: return operands == o.operands;
    }
    return false;
}

std::string_view to_string(Visibility v) {
    switch (v) {
        case Visibility::Public: return "public";
        case Visibility::Private: return "private";
        case Visibility::GroupScoped: return "group";
    }
    return "public";
}

const AttributeDef* ObjectClass::find(std::string_view attr) const {
    for (auto& a : attributes)
        if (a.name == attr) return &a;
    return nullptr;
}

const ArgDef* ActionDef::find_arg(std::string_view arg) const {
    for (auto& a : args)
        if (a.name == arg) return &a;
    return nullptr;
}

std::string_view to_string(ModuleSlot slot) {
    switch (slot) {
        case ModuleSlot::MyStatus: return "my_status";
        case ModuleSlot::MyActions: return "my_actions";
        case ModuleSlot::MyTasks: return "my_tasks";
        case ModuleSlot::Social: return "social";
        case ModuleSlot::Dashboard: return "dashboard";
    }
    return "my_status";
}

std::optional<ModuleSlot> slot_from_string(std::string_view s) {
    for (auto slot : kAllSlots)
        if (to_string(slot) == s) return slot;
    return std::nullopt;
}

std::string Audience::str() const {
    switch (kind) {
        case Kind::All: return "all";
        case Kind::Humans: return "humans";
        case Kind::Agents: return "agents";
        case Kind::Role: return "role(" + role + ")";
    }
    return "all";
}

const Value* ParadigmParameters::find(std::string_view name) const {
    for (auto& e : entries)
        if (e.name == name) return &e.value;
    return nullptr;
}

void ParadigmParameters::set(std::string name, Value value) {
    for (auto& e : entries) {
        if (e.name == name) {
            e.value = std::move(value);
            return;
        }
    }
    entries.push_back(ParameterEntry{std::move(name), std::move(value), {}});
}

std::optional<Money> ParadigmParameters::money(std::string_view name) const {
    if (auto* v = find(name))
        if (auto* m = std::get_if<Money>(v)) return *m;
    return std::nullopt;
}

std::optional<Duration> ParadigmParameters::duration(std::string_view name) const {
    if (auto* v = find(name))
        if (auto* d = std::get_if<Duration>(v)) return *d;
    return std::nullopt;
}

std::optional<std::int64_t> ParadigmParameters::integer(std::string_view name) const {
    if (auto* v = find(name))
        if (auto* i = std::get_if<std::int64_t>(v)) return *i;
    return std::nullopt;
}

std::optional<TypeKind> known_parameter_type(std::string_view name) {
    static const std::pair<std::string_view, TypeKind> table[] = {
        {"starting_money", TypeKind::Money},       {"specialty_cost", TypeKind::Money},
        {"regular_cost", TypeKind::Money},         {"production_time", TypeKind::Duration},
        {"max_production_num", TypeKind::Integer}, {"price_min", TypeKind::Money},
        {"price_max", TypeKind::Money},            {"incentive_money", TypeKind::Money},
        {"shape_amount_per_order", TypeKind::Integer}, {"session_duration", TypeKind::Duration},
        {"perception_interval", TypeKind::Duration},   {"participant_count", TypeKind::Integer},
    };
    for (auto& [n, k] : table)
        if (n == name) return k;
    return std::nullopt;
}

const std::vector<std::string>& required_parameters() {
    static const std::vector<std::string> names{"starting_money", "session_duration", "participant_count"};
    return names;
}

const ObjectClass* ExperimentConfig::find_class(std::string_view name) const {
    for (auto& c : objects)
        if (c.name == name) return &c;
    return nullptr;
}

const ActionDef* ExperimentConfig::find_action(std::string_view name) const {
    for (auto& a : actions)
        if (a.name == name) return &a;
    return nullptr;
}

const PolicyDef* ExperimentConfig::find_policy(std::string_view name) const {
    for (auto& p : policies)
        if (p.name == name) return &p;
    return nullptr;
}

bool ExperimentConfig::has_role(std::string_view role) const {
    return std::find(roles.begin(), roles.end(), role) != roles.end();
}

std::vector<std::string> ExperimentConfig::shape_types() const {
    if (auto* shape = find_class("Shape"))
        if (auto* type = shape->find("type"); type && type->type.kind == TypeKind::Enum) return type->type.variants;
    return {};
}

}  // namespace agora::ecl
