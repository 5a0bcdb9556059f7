#include "ecl_generator.hpp"

#include <algorithm>
#include <functional>

#include "agora/ecl/builtins.hpp"
#include "agora/ecl/resolve.hpp"

namespace agora::testkit {
namespace {

using namespace agora::ecl;

const char* const kWords[] = {"alpha", "bravo", "cedar", "delta", "ember", "flint", "grove", "harbor",
                              "iris",  "juniper", "kestrel", "lumen", "maple", "nova", "onyx", "pine",
                              "quartz", "raven", "sierra", "tundra", "umber", "vale", "willow", "yarrow"};

struct Ref {
    AttributeRef ref;
    TypeSpec type;
};

struct Gen {
    SeededStream& rng;

    std::int64_t pick(std::int64_t n) { return rng.uniform(0, n - 1); }
    bool coin(int percent = 50) { return rng.uniform(0, 99) < percent; }
    std::string word() { return kWords[pick(std::size(kWords))]; }

    std::vector<std::string> distinct_words(int n, const std::string& suffix = "") {
        std::vector<std::string> all(std::begin(kWords), std::end(kWords));
        rng.shuffle(all);
        all.resize(n);
        for (auto& w : all) w += suffix;
        return all;
    }

    Value literal(const TypeSpec& t) {
        switch (t.kind) {
            case TypeKind::Integer: return rng.uniform(0, 5000);
            case TypeKind::Decimal: {
                switch (pick(3)) {
                    case 0: return static_cast<double>(rng.uniform(0, 4000)) / 8.0;
                    case 1: return rng.unit() * 1000.0;
                    default: return rng.unit() * 1e-7;
                }
            }
            case TypeKind::String: {
                std::string s = word();
                if (coin(30)) s += " \"quoted\" \\ tab\t";
                return s;
            }
            case TypeKind::Boolean: return coin();
            case TypeKind::Money: return Money{rng.uniform(0, 50000)};
            case TypeKind::Duration: return Duration{coin() ? rng.uniform(0, 900) * 1000 : rng.uniform(1, 90000)};
            case TypeKind::Enum: return EnumValue{t.variants[pick(t.variants.size())]};
            case TypeKind::List: {
                ListValue l;
                for (int i = 0, n = static_cast<int>(pick(4)); i < n; ++i)
                    l.items.push_back(t.variants[pick(t.variants.size())]);
                return l;
            }
        }
        return std::int64_t{0};
    }

    /// Attribute default literal; negative numerics are legal here.
    Value default_literal(const TypeSpec& t) {
        Value v = literal(t);
        if (coin(20)) {
            std::visit(
                [](auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, double>) x = -x;
                    else if constexpr (std::is_same_v<T, Money>) x.cents = -x.cents;
                    else if constexpr (std::is_same_v<T, Duration>) x.ms = -x.ms;
                },
                v);
        }
        return v;
    }

    TypeSpec scalar_type(const std::vector<std::string>& shapes) {
        switch (pick(8)) {
            case 0: return TypeSpec::of(TypeKind::Integer);
            case 1: return TypeSpec::of(TypeKind::Decimal);
            case 2: return TypeSpec::of(TypeKind::String);
            case 3: return TypeSpec::of(TypeKind::Boolean);
            case 4: return TypeSpec::of(TypeKind::Money);
            case 5: return TypeSpec::of(TypeKind::Duration);
            case 6: {
                auto t = TypeSpec::enumeration(distinct_words(static_cast<int>(rng.uniform(1, 4)), "_v"));
                return t;
            }
            default: {
                TypeSpec t{TypeKind::Enum, shapes, "Shape.type"};
                if (coin()) t.kind = TypeKind::List;
                return t;
            }
        }
    }

    // expressions ----------------------------------------------------------

    Expr lit(Value v) {
        Expr e;
        e.kind = ExprKind::Literal;
        e.literal = std::move(v);
        return e;
    }

    Expr ref_expr(const AttributeRef& r) {
        Expr e;
        e.kind = ExprKind::Ref;
        e.ref = r;
        return e;
    }

    Expr bin(Op op, Expr a, Expr b) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.op = op;
        e.operands = {std::move(a), std::move(b)};
        return e;
    }

    Expr un(Op op, Expr a) {
        Expr e;
        e.kind = ExprKind::Unary;
        e.op = op;
        e.operands = {std::move(a)};
        return e;
    }

    std::vector<const Ref*> refs_of(const std::vector<Ref>& scope, TypeKind k) {
        std::vector<const Ref*> out;
        for (auto& r : scope)
            if (r.type.kind == k) out.push_back(&r);
        return out;
    }

    Expr leaf(TypeKind k, const std::vector<Ref>& scope) {
        auto refs = refs_of(scope, k);
        if (!refs.empty() && coin(60)) return ref_expr(refs[pick(refs.size())]->ref);
        if (k == TypeKind::Boolean) return lit(coin());
        return lit(literal(TypeSpec::of(k)));
    }

    /// Expression whose static type is exactly `k` (numeric or boolean).
    Expr expr(TypeKind k, int depth, const std::vector<Ref>& scope) {
        if (depth <= 0 || coin(25)) return leaf(k, scope);
        if (k == TypeKind::Boolean) {
            switch (pick(6)) {
                case 0: return bin(coin() ? Op::And : Op::Or, expr(k, depth - 1, scope), expr(k, depth - 1, scope));
                case 1: return un(Op::Not, expr(k, depth - 1, scope));
                case 2: {
                    auto enums = refs_of(scope, TypeKind::Enum);
                    if (enums.empty()) return leaf(k, scope);
                    const Ref* r = enums[pick(enums.size())];
                    Expr e;
                    e.kind = ExprKind::EnumLiteral;
                    e.name = r->type.variants[pick(r->type.variants.size())];
                    Op op = coin() ? Op::Eq : Op::Ne;
                    return coin() ? bin(op, ref_expr(r->ref), e) : bin(op, e, ref_expr(r->ref));
                }
                case 3: {
                    auto strs = refs_of(scope, TypeKind::String);
                    if (strs.empty()) return leaf(k, scope);
                    return bin(Op::Eq, ref_expr(strs[pick(strs.size())]->ref), lit(literal(TypeSpec::of(TypeKind::String))));
                }
                case 4:
                    return bin(coin() ? Op::Eq : Op::Ne, expr(k, depth - 1, scope), expr(k, depth - 1, scope));
                default: {
                    static const Op cmp[] = {Op::Lt, Op::Le, Op::Gt, Op::Ge, Op::Eq, Op::Ne};
                    static const TypeKind nums[] = {TypeKind::Integer, TypeKind::Decimal, TypeKind::Money,
                                                    TypeKind::Duration};
                    TypeKind nk = nums[pick(4)];
                    return bin(cmp[pick(6)], expr(nk, depth - 1, scope), expr(nk, depth - 1, scope));
                }
            }
        }
        switch (pick(5)) {
            case 0: return bin(coin() ? Op::Add : Op::Sub, expr(k, depth - 1, scope), expr(k, depth - 1, scope));
            case 1: {
                if (k == TypeKind::Money || k == TypeKind::Duration) {
                    Expr n = expr(TypeKind::Integer, depth - 1, scope);
                    return coin() ? bin(Op::Mul, expr(k, depth - 1, scope), n) : bin(Op::Mul, n, expr(k, depth - 1, scope));
                }
                if (k == TypeKind::Decimal && coin())
                    return bin(Op::Mul, expr(TypeKind::Integer, depth - 1, scope), expr(k, depth - 1, scope));
                return bin(Op::Mul, expr(k, depth - 1, scope), expr(k, depth - 1, scope));
            }
            case 2: return un(Op::Neg, expr(k, depth - 1, scope));
            case 3: {
                Expr e;
                e.kind = ExprKind::If;
                e.operands = {expr(TypeKind::Boolean, depth - 1, scope), expr(k, depth - 1, scope),
                              expr(k, depth - 1, scope)};
                return e;
            }
            default:
                if (k == TypeKind::Decimal && coin())
                    return bin(Op::Add, expr(TypeKind::Integer, depth - 1, scope), expr(k, depth - 1, scope));
                return leaf(k, scope);
        }
    }

    // document ------------------------------------------------------------

    ExperimentConfig config() {
        ExperimentConfig c;
        c.paradigm = word() + "_paradigm";
        if (coin(70)) c.title = "Generated " + word();
        if (coin(50)) c.description = "Random paradigm with \"quotes\" and a \\ backslash";
        c.roles = {"participant"};
        if (coin(40)) c.roles.push_back("observer");

        auto& p = c.parameters;
        p.set("starting_money", Money{rng.uniform(0, 100000)});
        p.set("session_duration", Duration{rng.uniform(1, 3600) * 1000});
        p.set("participant_count", rng.uniform(1, 12));
        if (coin(70)) p.set("perception_interval", Duration{rng.uniform(1, 60000)});
        if (coin(60)) {
            auto lo = rng.uniform(0, 1000);
            p.set("price_min", Money{lo});
            p.set("price_max", Money{lo + rng.uniform(0, 10000)});
        }
        if (coin(60)) {
            auto sc = rng.uniform(0, 5000);
            p.set("specialty_cost", Money{sc});
            p.set("regular_cost", Money{sc + rng.uniform(1, 5000)});
        }
        if (coin(60)) p.set("max_production_num", rng.uniform(0, 20));
        if (coin(60)) p.set("incentive_money", Money{rng.uniform(0, 10000)});
        if (coin(50)) p.set("production_time", Duration{rng.uniform(0, 120) * 1000});
        for (int i = 0, n = static_cast<int>(pick(3)); i < n; ++i) {
            std::string name = "extra_" + std::to_string(i);
            TypeSpec t = scalar_type({});
            if (t.kind == TypeKind::Enum || t.kind == TypeKind::List) t = TypeSpec::of(TypeKind::Integer);
            p.set(name, literal(t));
        }

        // Shape (the shape domain feeds aliases and built-in args)
        auto shapes = distinct_words(static_cast<int>(rng.uniform(1, 4)));
        ObjectClass shape{"Shape", {}, {}};
        shape.attributes.push_back(AttributeDef{"type", TypeSpec::enumeration(shapes), {}, Visibility::Public, {}});
        for (int i = 0, n = static_cast<int>(pick(3)); i < n; ++i) {
            TypeSpec t = scalar_type(shapes);
            shape.attributes.push_back(AttributeDef{"s_attr" + std::to_string(i), t, {}, Visibility::Public, {}});
        }

        ObjectClass participant{std::string(kParticipantClass), {}, {}};
        for (auto& native : native_participant_attributes(shapes)) {
            if (!coin(60) && native.name != "wealth" && native.name != "produced_count") continue;
            TypeSpec t = native.type;
            if (t.kind == TypeKind::Enum || t.kind == TypeKind::List) t.alias = "Shape.type";
            participant.attributes.push_back(AttributeDef{native.name, t, {}, Visibility::Public, {}});
        }
        for (int i = 0, n = static_cast<int>(rng.uniform(1, 4)); i < n; ++i) {
            participant.attributes.push_back(
                AttributeDef{"p_extra" + std::to_string(i), scalar_type(shapes), {}, Visibility::Public, {}});
        }

        std::vector<ObjectClass> others;
        for (int i = 0, n = static_cast<int>(pick(3)); i < n; ++i) {
            ObjectClass cls{"Thing" + std::to_string(i), {}, {}};
            for (int j = 0, m = static_cast<int>(rng.uniform(1, 4)); j < m; ++j)
                cls.attributes.push_back(
                    AttributeDef{"t_attr" + std::to_string(j), scalar_type(shapes), {}, Visibility::Public, {}});
            others.push_back(std::move(cls));
        }

        auto finish = [&](ObjectClass& cls) {
            for (auto& a : cls.attributes) {
                a.default_value = default_literal(a.type);
                int v = static_cast<int>(pick(3));
                a.visibility = v == 0 ? Visibility::Public : (v == 1 ? Visibility::Private : Visibility::GroupScoped);
            }
        };
        finish(shape);
        finish(participant);
        for (auto& o : others) finish(o);

        std::vector<ObjectClass> classes{shape, participant};
        classes.insert(classes.end(), others.begin(), others.end());
        rng.shuffle(classes);
        c.objects = classes;

        // scope shared by every expression
        std::vector<Ref> base;
        for (auto& cls : c.objects) {
            for (auto& a : cls.attributes) {
                if (a.type.kind == TypeKind::List) continue;
                TypeSpec t = a.type;
                t.alias.clear();
                base.push_back(Ref{AttributeRef{cls.name, a.name, {}}, t});
                if (cls.name == kParticipantClass) base.push_back(Ref{AttributeRef{"actor", a.name, {}}, t});
            }
        }
        for (auto& e : p.entries) {
            TypeKind k = std::visit(
                [](auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::int64_t>) return TypeKind::Integer;
                    else if constexpr (std::is_same_v<T, double>) return TypeKind::Decimal;
                    else if constexpr (std::is_same_v<T, bool>) return TypeKind::Boolean;
                    else if constexpr (std::is_same_v<T, std::string>) return TypeKind::String;
                    else if constexpr (std::is_same_v<T, Money>) return TypeKind::Money;
                    else if constexpr (std::is_same_v<T, Duration>) return TypeKind::Duration;
                    else return TypeKind::List;
                },
                e.value);
            base.push_back(Ref{AttributeRef{"param", e.name, {}}, TypeSpec::of(k)});
        }
        base.push_back(Ref{AttributeRef{"session", "elapsed", {}}, TypeSpec::of(TypeKind::Duration)});
        base.push_back(Ref{AttributeRef{"session", "remaining", {}}, TypeSpec::of(TypeKind::Duration)});
        base.push_back(Ref{AttributeRef{"session", "participant_count", {}}, TypeSpec::of(TypeKind::Integer)});

        // numeric delta targets on the acting participant
        std::vector<const AttributeDef*> targets;
        for (auto& a : c.find_class(kParticipantClass)->attributes) {
            bool managed = a.name == "orders_fulfilled" || a.name == "in_production";
            if (a.type.is_numeric() && !managed) targets.push_back(&a);
        }

        // actions
        for (auto name : kBuiltinActions) {
            if (!coin(60)) continue;
            ActionDef a;
            a.name = std::string(name);
            a.actor_role = c.roles[pick(c.roles.size())];
            for (auto& arg : builtin_action_args(name, shapes)) {
                if (!coin(60)) continue;
                ArgDef d = arg;
                if (d.type.variants == shapes && d.type.kind == TypeKind::Enum) d.type.alias = "Shape.type";
                a.args.push_back(d);
            }
            c.actions.push_back(std::move(a));
        }
        for (int i = 0, n = static_cast<int>(rng.uniform(0, 3)); i < n; ++i) {
            ActionDef a;
            a.name = "custom_" + word() + std::to_string(i);
            a.actor_role = c.roles[pick(c.roles.size())];
            for (int j = 0, m = static_cast<int>(pick(4)); j < m; ++j) {
                TypeSpec t = scalar_type(shapes);
                if (t.kind == TypeKind::List) t.kind = TypeKind::Enum;
                a.args.push_back(ArgDef{"arg" + std::to_string(j), t});
            }
            c.actions.push_back(std::move(a));
        }
        rng.shuffle(c.actions);

        auto arg_refs = [&](const std::vector<const ActionDef*>& acts) {
            std::vector<Ref> out;
            if (acts.empty()) return out;
            for (auto& arg : acts.front()->args) {
                bool shared = std::all_of(acts.begin(), acts.end(), [&](const ActionDef* x) {
                    auto* o = x->find_arg(arg.name);
                    return o && o->type.compatible(arg.type);
                });
                if (!shared) continue;
                TypeSpec t = arg.type;
                t.alias.clear();
                out.push_back(Ref{AttributeRef{"args", arg.name, {}}, t});
            }
            return out;
        };
        auto target_refs = [&]() {
            std::vector<Ref> out;
            for (auto& a : c.find_class(kParticipantClass)->attributes)
                if (a.type.kind != TypeKind::List) {
                    TypeSpec t = a.type;
                    t.alias.clear();
                    out.push_back(Ref{AttributeRef{"target", a.name, {}}, t});
                }
            return out;
        };

        for (auto& a : c.actions) {
            std::vector<Ref> scope = base;
            auto args = arg_refs({&a});
            scope.insert(scope.end(), args.begin(), args.end());
            if (has_counterpart(a.name)) {
                auto t = target_refs();
                scope.insert(scope.end(), t.begin(), t.end());
            }
            for (auto* list : {&a.costs, &a.effects}) {
                for (int i = 0, n = static_cast<int>(pick(3)); i < n && !targets.empty(); ++i) {
                    const AttributeDef* tgt = targets[pick(targets.size())];
                    TypeKind k = tgt->type.kind;
                    if (k == TypeKind::Decimal && coin(30)) k = TypeKind::Integer;
                    list->push_back(AttributeDelta{AttributeRef{coin() ? "actor" : std::string(kParticipantClass),
                                                                tgt->name, {}},
                                                   expr(k, 3, scope)});
                }
            }
        }

        // policies
        for (int i = 0, n = static_cast<int>(pick(5)); i < n; ++i) {
            PolicyDef pol;
            pol.name = "policy_" + std::to_string(i);
            pol.deny_message = "denied by " + word();
            std::vector<Ref> scope = base;
            if (!c.actions.empty() && coin(70)) {
                pol.kind = PolicyKind::Precondition;
                std::vector<const ActionDef*> acts;
                for (auto& a : c.actions)
                    if (coin(40)) acts.push_back(&a);
                if (acts.empty()) acts.push_back(&c.actions[pick(c.actions.size())]);
                for (auto* a : acts) pol.actions.push_back(a->name);
                auto args = arg_refs(acts);
                scope.insert(scope.end(), args.begin(), args.end());
                if (std::all_of(acts.begin(), acts.end(), [](auto* a) { return has_counterpart(a->name); })) {
                    auto t = target_refs();
                    scope.insert(scope.end(), t.begin(), t.end());
                }
            } else {
                pol.kind = PolicyKind::GlobalRule;
            }
            pol.predicate = expr(TypeKind::Boolean, 3, scope);
            c.policies.push_back(std::move(pol));
        }

        // views
        for (int i = 0, n = static_cast<int>(pick(6)); i < n; ++i) {
            ViewDef v;
            v.slot = kAllSlots[pick(5)];
            switch (pick(4)) {
                case 0: v.audience.kind = Audience::Kind::All; break;
                case 1: v.audience.kind = Audience::Kind::Humans; break;
                case 2: v.audience.kind = Audience::Kind::Agents; break;
                default:
                    v.audience.kind = Audience::Kind::Role;
                    v.audience.role = c.roles[pick(c.roles.size())];
            }
            for (int j = 0, m = static_cast<int>(pick(4)); j < m; ++j) {
                auto& cls = c.objects[pick(c.objects.size())];
                auto& attr = cls.attributes[pick(cls.attributes.size())];
                if (!is_owner_slot(v.slot) && attr.visibility == Visibility::Private) continue;
                v.bindings.push_back(ViewBinding{AttributeRef{cls.name, attr.name, {}}, "Label " + word()});
            }
            c.views.push_back(std::move(v));
        }

        resolve_config(c);  // derives required_policies
        return c;
    }
};

}  // namespace

ecl::ExperimentConfig generate_config(SeededStream& rng) { return Gen{rng}.config(); }

ecl::Expr generate_expression(SeededStream& rng, TypeKind kind, int depth) {
    std::vector<Ref> scope{
        Ref{ecl::AttributeRef{"param", "a", {}}, TypeSpec::of(TypeKind::Integer)},
        Ref{ecl::AttributeRef{"param", "m", {}}, TypeSpec::of(TypeKind::Money)},
        Ref{ecl::AttributeRef{"param", "d", {}}, TypeSpec::of(TypeKind::Duration)},
        Ref{ecl::AttributeRef{"param", "x", {}}, TypeSpec::of(TypeKind::Decimal)},
    };
    return Gen{rng}.expr(kind, depth, scope);
}

}  // namespace agora::testkit
