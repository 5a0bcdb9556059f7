#include "agora/ecl/validator.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "agora/ecl/builtins.hpp"
#include "agora/ecl/resolve.hpp"

namespace agora::ecl {

json ValidationReport::to_json() const {
    json arr = json::array();
    for (auto& c : conflicts) arr.push_back({{"code", c.code}, {"message", c.message}, {"location", c.location}});
    return {{"valid", valid()}, {"conflicts", arr}};
}

std::string ValidationReport::render() const {
    if (conflicts.empty()) return "ok\n";
    std::string out;
    for (auto& c : conflicts) out += c.location + ": " + c.code + ": " + c.message + "\n";
    return out;
}

namespace {

std::string where(SourcePos pos, const std::string& what) {
    if (pos.line == 0) return what;
    return std::to_string(pos.line) + ":" + std::to_string(pos.column) + " " + what;
}

class Checker {
public:
    explicit Checker(const ExperimentConfig& c) : cfg_(c) {}

    ValidationReport run() {
        duplicates();
        participant_class();
        aliases();
        builtins();
        engine_managed();
        parameters();
        privacy();
        resolution();
        return std::move(report_);
    }

private:
    void add(std::string code, std::string message, std::string location) {
        report_.conflicts.push_back(Conflict{std::move(code), std::move(message), std::move(location)});
    }

    template <typename Range, typename Name, typename Pos>
    void unique(const Range& items, Name name, Pos pos, const char* code, const char* noun) {
        std::set<std::string> seen;
        for (auto& item : items) {
            const std::string& n = name(item);
            if (!seen.insert(n).second) add(code, std::string("duplicate ") + noun + " '" + n + "'", where(pos(item), n));
        }
    }

    void duplicates() {
        auto name = [](auto& x) -> const std::string& { return x.name; };
        auto pos = [](auto& x) { return x.pos; };
        unique(cfg_.objects, name, pos, "duplicate_object_class", "object class");
        unique(cfg_.actions, name, pos, "duplicate_action", "action");
        unique(cfg_.policies, name, pos, "duplicate_policy", "policy");
        unique(cfg_.parameters.entries, name, pos, "duplicate_parameter", "parameter");
        std::set<std::string> roles;
        for (auto& r : cfg_.roles)
            if (!roles.insert(r).second) add("duplicate_role", "duplicate role '" + r + "'", r);
        for (auto& cls : cfg_.objects) {
            unique(cls.attributes, name, pos, "duplicate_attribute", ("attribute in " + cls.name).c_str());
            if (is_scope_owner(cls.name))
                add("reserved_class_name", "object class may not be named '" + cls.name + "'", where(cls.pos, cls.name));
            for (auto& a : cls.attributes) {
                std::set<std::string> variants;
                for (auto& v : a.type.variants)
                    if (!variants.insert(v).second)
                        add("duplicate_variant", "duplicate enum variant '" + v + "' in " + cls.name + "." + a.name,
                            where(a.pos, cls.name + "." + a.name));
                if (!conforms(a.default_value, a.type))
                    add("type_mismatch", "default of " + cls.name + "." + a.name + " does not conform to " +
                                             describe(a.type),
                        where(a.pos, cls.name + "." + a.name));
            }
        }
        for (auto& a : cfg_.actions) {
            std::set<std::string> args;
            for (auto& arg : a.args)
                if (!args.insert(arg.name).second)
                    add("duplicate_argument", "duplicate argument '" + arg.name + "' in action " + a.name,
                        where(a.pos, a.name));
        }
    }

    void participant_class() {
        const ObjectClass* p = cfg_.find_class(kParticipantClass);
        if (!p) {
            add("missing_participant_class", "the Participant object class is required", "objects");
            return;
        }
        auto shapes = cfg_.shape_types();
        for (auto& a : p->attributes) {
            auto native = native_participant_attribute(a.name, shapes);
            if (native && !native->compatible(a.type))
                add("native_attribute_type",
                    "Participant." + a.name + " must be declared as " + describe(*native) + ", found " + describe(a.type),
                    where(a.pos, "Participant." + a.name));
        }
    }

    void aliases() {
        auto check = [&](const TypeSpec& t, const std::string& what, SourcePos pos) {
            if (t.alias.empty()) return;
            auto dot = t.alias.find('.');
            const ObjectClass* cls = dot == std::string::npos ? nullptr : cfg_.find_class(t.alias.substr(0, dot));
            const AttributeDef* attr = cls ? cls->find(t.alias.substr(dot + 1)) : nullptr;
            if (!attr || attr->type.kind != TypeKind::Enum) {
                add("dangling_reference", "type alias '" + t.alias + "' of " + what + " does not name an enum attribute",
                    where(pos, what));
            } else if (attr->type.variants != t.variants) {
                add("type_mismatch", "type of " + what + " disagrees with its alias '" + t.alias + "'", where(pos, what));
            }
        };
        for (auto& cls : cfg_.objects)
            for (auto& a : cls.attributes) check(a.type, cls.name + "." + a.name, a.pos);
        for (auto& act : cfg_.actions)
            for (auto& arg : act.args) check(arg.type, act.name + "." + arg.name, act.pos);
    }

    void builtins() {
        auto shapes = cfg_.shape_types();
        for (auto& a : cfg_.actions) {
            if (!is_builtin_action(a.name)) continue;
            auto provided = builtin_action_args(a.name, shapes);
            for (auto& arg : a.args) {
                auto it = std::find_if(provided.begin(), provided.end(), [&](auto& p) { return p.name == arg.name; });
                if (it == provided.end()) {
                    add("builtin_signature", "built-in action " + a.name + " has no argument '" + arg.name + "'",
                        where(a.pos, a.name));
                } else if (!it->type.compatible(arg.type)) {
                    add("builtin_signature",
                        "argument " + a.name + "." + arg.name + " must be " + describe(it->type),
                        where(a.pos, a.name));
                }
            }
            if ((a.name == "produce_shape" || a.name == "propose_trade_offer") && shapes.empty())
                add("builtin_signature", "built-in action " + a.name + " needs a Shape class with an enum 'type'",
                    where(a.pos, a.name));
        }
    }

    void engine_managed() {
        for (auto& a : cfg_.actions) {
            for (auto* list : {&a.costs, &a.effects}) {
                for (auto& d : *list) {
                    auto& attr = d.target.attribute;
                    if (attr == "orders_fulfilled" || attr == "in_production" || attr == "inventory" ||
                        attr == "orders")
                        add("engine_managed_attribute",
                            "action " + a.name + " may not change engine-managed attribute " + d.target.str(),
                            where(d.target.pos, a.name));
                }
            }
        }
    }

    void parameters() {
        auto& p = cfg_.parameters;
        for (auto& e : p.entries) {
            auto k = known_parameter_type(e.name);
            if (k && !conforms(e.value, TypeSpec::of(*k)))
                add("type_mismatch", "parameter " + e.name + " must be " + to_string(*k), where(e.pos, e.name));
            bool negative = std::visit(
                [](auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::int64_t>) return v < 0;
                    else if constexpr (std::is_same_v<T, Money>) return v.cents < 0;
                    else if constexpr (std::is_same_v<T, Duration>) return v.ms < 0;
                    else return false;
                },
                e.value);
            if (k && negative) add("parameter_invariant", "parameter " + e.name + " must be >= 0", where(e.pos, e.name));
        }
        for (auto& name : required_parameters())
            if (!p.find(name)) add("parameter_invariant", "missing required parameter '" + name + "'", name);
        auto lo = p.money("price_min"), hi = p.money("price_max");
        if (lo && hi && *lo > *hi) add("parameter_invariant", "price_min exceeds price_max", "price_min");
        auto sc = p.money("specialty_cost"), rc = p.money("regular_cost");
        if (sc && rc && !(*sc < *rc)) add("parameter_invariant", "specialty_cost must be below regular_cost", "specialty_cost");
        if (p.perception_interval().ms <= 0)
            add("parameter_invariant", "perception_interval must be positive", "perception_interval");
        if (p.find("session_duration") && p.session_duration().ms <= 0)
            add("parameter_invariant", "session_duration must be positive", "session_duration");
        if (p.find("participant_count") && p.participant_count() < 1)
            add("parameter_invariant", "participant_count must be at least 1", "participant_count");
    }

    void privacy() {
        for (auto& v : cfg_.views) {
            if (is_owner_slot(v.slot)) continue;
            for (auto& b : v.bindings) {
                const ObjectClass* cls = cfg_.find_class(b.ref.owner);
                const AttributeDef* attr = cls ? cls->find(b.ref.attribute) : nullptr;
                if (attr && attr->visibility == Visibility::Private)
                    add("privacy_violation",
                        "privacy violation: private attribute " + b.ref.str() + " bound in shared slot " +
                            std::string(to_string(v.slot)) + " for " + v.audience.str(),
                        where(b.ref.pos, b.ref.str()));
            }
        }
    }

    void resolution() {
        ExperimentConfig copy = cfg_;
        for (auto& d : resolve_config(copy)) {
            std::string code = d.rule.empty() ? "dangling_reference" : d.rule;
            add(code, d.message, where(d.pos, d.subject));
        }
        for (std::size_t i = 0; i < cfg_.actions.size() && i < copy.actions.size(); ++i) {
            if (cfg_.actions[i].required_policies != copy.actions[i].required_policies)
                add("required_policies_mismatch",
                    "required policies of action " + cfg_.actions[i].name + " disagree with the policies' 'on' lists",
                    where(cfg_.actions[i].pos, cfg_.actions[i].name));
        }
    }

    const ExperimentConfig& cfg_;
    ValidationReport report_;
};

}  // namespace

ValidationReport validate_config(const ExperimentConfig& config) { return Checker(config).run(); }

}  // namespace agora::ecl
