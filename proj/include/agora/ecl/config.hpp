#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agora/common/value.hpp"

namespace agora::ecl {

/// The only ECL format version this build accepts.
inline constexpr std::string_view kFormatVersion = "1";

struct SourcePos {
    int line = 0;
    int column = 0;
};

/// `owner.attribute`. Owners are object class names or one of the scopes
/// actor, target, args, param, session.
struct AttributeRef {
    std::string owner;
    std::string attribute;
    SourcePos pos;

    std::string str() const { return owner + "." + attribute; }
    bool operator==(const AttributeRef& o) const { return owner == o.owner && attribute == o.attribute; }
};

enum class ExprKind { Literal, EnumLiteral, ListLiteral, Ref, Unary, Binary, If };
enum class Op { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or, Not, Neg };

std::string_view op_symbol(Op op);

/// Expression tree. Children live in `operands`:
/// Unary -> [x], Binary -> [lhs, rhs], If -> [cond, then, else], ListLiteral -> items.
/// `type` is filled in by name resolution.
struct Expr {
    ExprKind kind = ExprKind::Literal;
    Value literal;
    std::string name;  // EnumLiteral identifier
    AttributeRef ref;
    Op op = Op::Add;
    std::vector<Expr> operands;
    TypeSpec type;
    SourcePos pos;

    bool operator==(const Expr& o) const;
};

enum class Visibility { Public, Private, GroupScoped };
std::string_view to_string(Visibility v);

struct AttributeDef {
    std::string name;
    TypeSpec type;
    Value default_value;
    Visibility visibility = Visibility::Public;
    SourcePos pos;

    bool operator==(const AttributeDef& o) const {
        return name == o.name && type == o.type && default_value == o.default_value && visibility == o.visibility;
    }
};

struct ObjectClass {
    std::string name;
    std::vector<AttributeDef> attributes;
    SourcePos pos;

    const AttributeDef* find(std::string_view attr) const;
    bool operator==(const ObjectClass& o) const { return name == o.name && attributes == o.attributes; }
};

struct ArgDef {
    std::string name;
    TypeSpec type;
    bool operator==(const ArgDef&) const = default;
};

/// Costs are subtracted from their target, effects added to it.
struct AttributeDelta {
    AttributeRef target;
    Expr amount;
    bool operator==(const AttributeDelta& o) const { return target == o.target && amount == o.amount; }
};

struct ActionDef {
    std::string name;
    std::string actor_role;
    std::vector<ArgDef> args;
    std::vector<AttributeDelta> costs;
    std::vector<AttributeDelta> effects;
    /// Derived from the policies' `on` clauses at compile time, in policy declaration order.
    std::vector<std::string> required_policies;
    SourcePos pos;

    const ArgDef* find_arg(std::string_view arg) const;
    bool operator==(const ActionDef& o) const {
        return name == o.name && actor_role == o.actor_role && args == o.args && costs == o.costs &&
               effects == o.effects && required_policies == o.required_policies;
    }
};

enum class PolicyKind { Precondition, GlobalRule };

struct PolicyDef {
    std::string name;
    PolicyKind kind = PolicyKind::Precondition;
    std::vector<std::string> actions;  // preconditions only
    Expr predicate;
    std::string deny_message;
    SourcePos pos;

    bool operator==(const PolicyDef& o) const {
        return name == o.name && kind == o.kind && actions == o.actions && predicate == o.predicate &&
               deny_message == o.deny_message;
    }
};

enum class ModuleSlot { MyStatus, MyActions, MyTasks, Social, Dashboard };
inline constexpr ModuleSlot kAllSlots[] = {ModuleSlot::MyStatus, ModuleSlot::MyActions, ModuleSlot::MyTasks,
                                           ModuleSlot::Social, ModuleSlot::Dashboard};
std::string_view to_string(ModuleSlot slot);
std::optional<ModuleSlot> slot_from_string(std::string_view s);
/// my_status, my_actions and my_tasks render the viewer's own record.
inline bool is_owner_slot(ModuleSlot s) { return s != ModuleSlot::Social && s != ModuleSlot::Dashboard; }

struct Audience {
    enum class Kind { All, Humans, Agents, Role };
    Kind kind = Kind::All;
    std::string role;

    std::string str() const;
    bool operator==(const Audience&) const = default;
};

struct ViewBinding {
    AttributeRef ref;
    std::string label;
    bool operator==(const ViewBinding&) const = default;
};

struct ViewDef {
    ModuleSlot slot = ModuleSlot::MyStatus;
    Audience audience;
    std::vector<ViewBinding> bindings;
    SourcePos pos;

    bool operator==(const ViewDef& o) const {
        return slot == o.slot && audience == o.audience && bindings == o.bindings;
    }
};

struct ParameterEntry {
    std::string name;
    Value value;
    SourcePos pos;
    bool operator==(const ParameterEntry& o) const { return name == o.name && value == o.value; }
};

/// Named paradigm parameters in declaration order. Well-known names carry a
/// fixed type (see known_parameter_type); others are paradigm-specific extras.
class ParadigmParameters {
public:
    std::vector<ParameterEntry> entries;

    const Value* find(std::string_view name) const;
    void set(std::string name, Value value);

    std::optional<Money> money(std::string_view name) const;
    std::optional<Duration> duration(std::string_view name) const;
    std::optional<std::int64_t> integer(std::string_view name) const;

    Money starting_money() const { return money("starting_money").value_or(Money{}); }
    Duration session_duration() const { return duration("session_duration").value_or(Duration{}); }
    /// 15 s when the document leaves it out.
    Duration perception_interval() const { return duration("perception_interval").value_or(Duration{15000}); }
    std::int64_t participant_count() const { return integer("participant_count").value_or(0); }

    bool operator==(const ParadigmParameters&) const = default;
};

std::optional<TypeKind> known_parameter_type(std::string_view name);
/// Names that every document must declare.
const std::vector<std::string>& required_parameters();

struct ExperimentConfig {
    std::string format_version{kFormatVersion};
    std::string paradigm;
    std::string title;
    std::string description;
    std::vector<std::string> roles;
    ParadigmParameters parameters;
    std::vector<ObjectClass> objects;
    std::vector<ActionDef> actions;
    std::vector<PolicyDef> policies;
    std::vector<ViewDef> views;

    const ObjectClass* find_class(std::string_view name) const;
    const ActionDef* find_action(std::string_view name) const;
    const PolicyDef* find_policy(std::string_view name) const;
    bool has_role(std::string_view role) const;

    /// Variants of Shape.type, or empty when the paradigm has no Shape class.
    std::vector<std::string> shape_types() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// The class that holds one record per seat.
inline constexpr std::string_view kParticipantClass = "Participant";

}  // namespace agora::ecl
