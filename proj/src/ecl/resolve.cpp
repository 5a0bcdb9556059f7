#include "agora/ecl/resolve.hpp"

#include <algorithm>

#include "agora/ecl/builtins.hpp"

namespace agora::ecl {

bool is_scope_owner(std::string_view name) {
    return std::find(std::begin(kScopeOwners), std::end(kScopeOwners), name) != std::end(kScopeOwners);
}

bool has_counterpart(std::string_view action) {
    return action == "propose_trade_offer" || action == "trade_response" || action == "cancel_trade_offer";
}

namespace {

struct Context {
    const ExperimentConfig& cfg;
    std::vector<const ActionDef*> actions;  // actions whose args are in scope
    bool allow_target = false;
    std::string where;
    std::vector<Diagnostic>& out;
};

void report(Context& ctx, ErrorCode kind, SourcePos pos, std::string message, std::string subject,
            std::string rule) {
    ctx.out.push_back(Diagnostic{kind, pos, ctx.where + ": " + message, std::move(subject), std::move(rule)});
}

std::optional<TypeSpec> session_attribute(std::string_view attr) {
    if (attr == "elapsed" || attr == "remaining") return TypeSpec::of(TypeKind::Duration);
    if (attr == "participant_count") return TypeSpec::of(TypeKind::Integer);
    return std::nullopt;
}

TypeSpec type_of(const Value& v) {
    struct V {
        TypeSpec operator()(std::int64_t) const { return TypeSpec::of(TypeKind::Integer); }
        TypeSpec operator()(double) const { return TypeSpec::of(TypeKind::Decimal); }
        TypeSpec operator()(bool) const { return TypeSpec::of(TypeKind::Boolean); }
        TypeSpec operator()(const std::string&) const { return TypeSpec::of(TypeKind::String); }
        TypeSpec operator()(Money) const { return TypeSpec::of(TypeKind::Money); }
        TypeSpec operator()(Duration) const { return TypeSpec::of(TypeKind::Duration); }
        TypeSpec operator()(const EnumValue& e) const { return TypeSpec::enumeration({e.variant}); }
        TypeSpec operator()(const ListValue&) const { return TypeSpec::of(TypeKind::List); }
    };
    return std::visit(V{}, v);
}

std::optional<TypeSpec> ref_type(const AttributeRef& ref, Context& ctx) {
    const auto& owner = ref.owner;
    if (owner == "param") {
        if (auto* v = ctx.cfg.parameters.find(ref.attribute)) return type_of(*v);
        report(ctx, ErrorCode::UnknownReference, ref.pos, "unknown parameter '" + ref.attribute + "'", ref.str(),
               "dangling_reference");
        return std::nullopt;
    }
    if (owner == "session") {
        if (auto t = session_attribute(ref.attribute)) return t;
        report(ctx, ErrorCode::UnknownReference, ref.pos, "unknown session attribute '" + ref.attribute + "'",
               ref.str(), "dangling_reference");
        return std::nullopt;
    }
    if (owner == "args") {
        if (ctx.actions.empty()) {
            report(ctx, ErrorCode::UnknownReference, ref.pos, "'args' is only available in action-specific policies",
                   ref.str(), "dangling_reference");
            return std::nullopt;
        }
        std::optional<TypeSpec> found;
        for (auto* a : ctx.actions) {
            const ArgDef* arg = a->find_arg(ref.attribute);
            if (!arg) {
                report(ctx, ErrorCode::UnknownReference, ref.pos,
                       "action '" + a->name + "' has no argument '" + ref.attribute + "'", ref.str(),
                       "dangling_reference");
                return std::nullopt;
            }
            if (found && !found->compatible(arg->type)) {
                report(ctx, ErrorCode::TypeMismatch, ref.pos,
                       "argument '" + ref.attribute + "' has different types across the policy's actions", ref.str(),
                       "type_mismatch");
                return std::nullopt;
            }
            found = arg->type;
        }
        return found;
    }
    std::string_view cls_name = owner;
    if (owner == "actor" || owner == "target") {
        if (owner == "target" && !ctx.allow_target) {
            report(ctx, ErrorCode::UnknownReference, ref.pos, "'target' is only bound for trade actions", ref.str(),
                   "dangling_reference");
            return std::nullopt;
        }
        cls_name = kParticipantClass;
    }
    const ObjectClass* cls = ctx.cfg.find_class(cls_name);
    if (!cls) {
        report(ctx, ErrorCode::UnknownReference, ref.pos, "unknown object '" + std::string(cls_name) + "'",
               std::string(cls_name), "dangling_reference");
        return std::nullopt;
    }
    const AttributeDef* attr = cls->find(ref.attribute);
    if (!attr) {
        report(ctx, ErrorCode::UnknownReference, ref.pos,
               "object '" + cls->name + "' has no attribute '" + ref.attribute + "'", cls->name + "." + ref.attribute,
               "dangling_reference");
        return std::nullopt;
    }
    return attr->type;
}

bool numeric_family(const TypeSpec& a, const TypeSpec& b) {
    auto plain = [](TypeKind k) { return k == TypeKind::Integer || k == TypeKind::Decimal; };
    if (plain(a.kind) && plain(b.kind)) return true;
    return a.kind == b.kind && (a.kind == TypeKind::Money || a.kind == TypeKind::Duration);
}

TypeSpec widen(const TypeSpec& a, const TypeSpec& b) {
    if (a.kind == TypeKind::Decimal || b.kind == TypeKind::Decimal) return TypeSpec::of(TypeKind::Decimal);
    return TypeSpec{a.kind, a.variants, {}};
}

std::optional<TypeSpec> check(Expr& e, Context& ctx, const TypeSpec* hint = nullptr);

std::optional<TypeSpec> mismatch(Expr& e, Context& ctx, const std::string& message) {
    report(ctx, ErrorCode::TypeMismatch, e.pos, message, std::string(op_symbol(e.op)), "type_mismatch");
    return std::nullopt;
}

std::optional<TypeSpec> check_enum_literal(Expr& e, Context& ctx, const TypeSpec* hint) {
    if (!hint || hint->kind != TypeKind::Enum) {
        report(ctx, ErrorCode::TypeMismatch, e.pos, "cannot infer the enum type of '" + e.name + "'", e.name,
               "type_mismatch");
        return std::nullopt;
    }
    if (std::find(hint->variants.begin(), hint->variants.end(), e.name) == hint->variants.end()) {
        report(ctx, ErrorCode::TypeMismatch, e.pos, "'" + e.name + "' is not a variant of " + describe(*hint), e.name,
               "type_mismatch");
        return std::nullopt;
    }
    return *hint;
}

/// Checks a pair of operands, typing an enum literal side against the other.
bool check_pair(Expr& e, Context& ctx, std::optional<TypeSpec>& l, std::optional<TypeSpec>& r) {
    Expr& lhs = e.operands[0];
    Expr& rhs = e.operands[1];
    if (lhs.kind == ExprKind::EnumLiteral && rhs.kind != ExprKind::EnumLiteral) {
        r = check(rhs, ctx);
        if (!r) return false;
        l = check(lhs, ctx, &*r);
    } else {
        l = check(lhs, ctx);
        if (!l) return false;
        r = check(rhs, ctx, &*l);
    }
    return l && r;
}

std::optional<TypeSpec> check(Expr& e, Context& ctx, const TypeSpec* hint) {
    std::optional<TypeSpec> t;
    switch (e.kind) {
        case ExprKind::Literal: t = type_of(e.literal); break;
        case ExprKind::EnumLiteral: t = check_enum_literal(e, ctx, hint); break;
        case ExprKind::ListLiteral:
            report(ctx, ErrorCode::TypeMismatch, e.pos, "list literals are not allowed in expressions", "[",
                   "type_mismatch");
            break;
        case ExprKind::Ref: t = ref_type(e.ref, ctx); break;
        case ExprKind::Unary: {
            auto inner = check(e.operands[0], ctx);
            if (!inner) break;
            if (e.op == Op::Not) {
                if (inner->kind != TypeKind::Boolean) return mismatch(e, ctx, "'not' needs a boolean operand");
                t = inner;
            } else {
                if (!inner->is_numeric()) return mismatch(e, ctx, "'-' needs a numeric operand");
                t = inner;
            }
            break;
        }
        case ExprKind::Binary: {
            std::optional<TypeSpec> l, r;
            if (!check_pair(e, ctx, l, r)) break;
            switch (e.op) {
                case Op::And:
                case Op::Or:
                    if (l->kind != TypeKind::Boolean || r->kind != TypeKind::Boolean)
                        return mismatch(e, ctx, "'" + std::string(op_symbol(e.op)) + "' needs boolean operands");
                    t = TypeSpec::of(TypeKind::Boolean);
                    break;
                case Op::Add:
                case Op::Sub:
                    if (!l->is_numeric() || !numeric_family(*l, *r))
                        return mismatch(e, ctx, "cannot combine " + describe(*l) + " and " + describe(*r));
                    t = widen(*l, *r);
                    break;
                case Op::Mul: {
                    auto k = [](const TypeSpec& s) { return s.kind; };
                    bool plain_l = k(*l) == TypeKind::Integer || k(*l) == TypeKind::Decimal;
                    bool plain_r = k(*r) == TypeKind::Integer || k(*r) == TypeKind::Decimal;
                    if (plain_l && plain_r) {
                        t = widen(*l, *r);
                    } else if ((k(*l) == TypeKind::Money || k(*l) == TypeKind::Duration) && k(*r) == TypeKind::Integer) {
                        t = TypeSpec::of(k(*l));
                    } else if ((k(*r) == TypeKind::Money || k(*r) == TypeKind::Duration) && k(*l) == TypeKind::Integer) {
                        t = TypeSpec::of(k(*r));
                    } else {
                        return mismatch(e, ctx, "cannot multiply " + describe(*l) + " by " + describe(*r));
                    }
                    break;
                }
                case Op::Lt:
                case Op::Le:
                case Op::Gt:
                case Op::Ge:
                    if (!l->is_numeric() || !numeric_family(*l, *r))
                        return mismatch(e, ctx, "cannot order " + describe(*l) + " against " + describe(*r));
                    t = TypeSpec::of(TypeKind::Boolean);
                    break;
                case Op::Eq:
                case Op::Ne: {
                    bool ok = (l->is_numeric() && numeric_family(*l, *r)) ||
                              (l->kind == r->kind && l->kind != TypeKind::Enum && l->kind != TypeKind::List &&
                               !l->is_numeric()) ||
                              (l->kind == TypeKind::Enum && l->compatible(*r));
                    if (!ok) return mismatch(e, ctx, "cannot compare " + describe(*l) + " with " + describe(*r));
                    t = TypeSpec::of(TypeKind::Boolean);
                    break;
                }
                default: break;
            }
            break;
        }
        case ExprKind::If: {
            auto c = check(e.operands[0], ctx);
            if (!c) break;
            if (c->kind != TypeKind::Boolean) return mismatch(e, ctx, "'if' condition must be boolean");
            std::optional<TypeSpec> a, b;
            Expr& then_e = e.operands[1];
            Expr& else_e = e.operands[2];
            if (then_e.kind == ExprKind::EnumLiteral && else_e.kind != ExprKind::EnumLiteral) {
                b = check(else_e, ctx, hint);
                if (!b) break;
                a = check(then_e, ctx, &*b);
            } else {
                a = check(then_e, ctx, hint);
                if (!a) break;
                b = check(else_e, ctx, &*a);
            }
            if (!a || !b) break;
            if (a->is_numeric() && numeric_family(*a, *b)) {
                t = widen(*a, *b);
            } else if (a->compatible(*b)) {
                t = *a;
            } else {
                return mismatch(e, ctx, "'if' branches have different types");
            }
            break;
        }
    }
    if (t) {
        t->alias.clear();
        e.type = *t;
    }
    return t;
}

void check_delta(AttributeDelta& d, Context& ctx, const char* what) {
    const auto& tgt = d.target;
    if (tgt.owner != "actor" && tgt.owner != kParticipantClass) {
        report(ctx, ErrorCode::TypeMismatch, tgt.pos,
               std::string(what) + " target must be an attribute of the acting participant (actor.x)", tgt.str(),
               "type_mismatch");
        check(d.amount, ctx);
        return;
    }
    auto target_type = ref_type(tgt, ctx);
    auto amount_type = check(d.amount, ctx);
    if (!target_type || !amount_type) return;
    bool ok = target_type->is_numeric() &&
              (target_type->kind == amount_type->kind ||
               (target_type->kind == TypeKind::Decimal && amount_type->kind == TypeKind::Integer));
    if (!ok) {
        report(ctx, ErrorCode::TypeMismatch, d.amount.pos,
               std::string(what) + " on " + tgt.str() + " (" + describe(*target_type) + ") has amount of type " +
                   describe(*amount_type),
               tgt.str(), "type_mismatch");
    }
}

}  // namespace

std::vector<Diagnostic> resolve_config(ExperimentConfig& cfg) {
    std::vector<Diagnostic> out;

    for (auto& action : cfg.actions) action.required_policies.clear();
    for (auto& p : cfg.policies) {
        if (p.kind != PolicyKind::Precondition) continue;
        for (auto& a : p.actions) {
            auto it = std::find_if(cfg.actions.begin(), cfg.actions.end(), [&](auto& x) { return x.name == a; });
            if (it == cfg.actions.end()) {
                out.push_back(Diagnostic{ErrorCode::UnknownReference, p.pos,
                                         "policy " + p.name + ": references missing action '" + a + "'", a,
                                         "policy_missing_action"});
            } else if (std::find(it->required_policies.begin(), it->required_policies.end(), p.name) ==
                       it->required_policies.end()) {
                it->required_policies.push_back(p.name);
            }
        }
    }

    for (auto& action : cfg.actions) {
        Context ctx{cfg, {&action}, has_counterpart(action.name), "action " + action.name, out};
        if (!cfg.has_role(action.actor_role)) {
            report(ctx, ErrorCode::UnknownRole, action.pos, "unknown actor role '" + action.actor_role + "'",
                   action.actor_role, "unknown_role");
        }
        for (auto& d : action.costs) check_delta(d, ctx, "cost");
        for (auto& d : action.effects) check_delta(d, ctx, "effect");
    }

    for (auto& p : cfg.policies) {
        Context ctx{cfg, {}, false, "policy " + p.name, out};
        if (p.kind == PolicyKind::Precondition) {
            bool all_counterpart = !p.actions.empty();
            bool complete = true;
            for (auto& a : p.actions) {
                const ActionDef* def = cfg.find_action(a);
                if (!def) {
                    complete = false;
                    continue;
                }
                ctx.actions.push_back(def);
                all_counterpart = all_counterpart && has_counterpart(a);
            }
            if (!complete) continue;  // already reported as policy_missing_action
            ctx.allow_target = all_counterpart;
        }
        auto t = check(p.predicate, ctx);
        if (t && t->kind != TypeKind::Boolean) {
            report(ctx, ErrorCode::TypeMismatch, p.predicate.pos, "predicate must be boolean, found " + describe(*t),
                   p.name, "type_mismatch");
        }
    }

    for (auto& v : cfg.views) {
        Context ctx{cfg, {}, false, "view " + std::string(to_string(v.slot)), out};
        if (v.audience.kind == Audience::Kind::Role && !cfg.has_role(v.audience.role)) {
            report(ctx, ErrorCode::UnknownRole, v.pos, "unknown audience role '" + v.audience.role + "'",
                   v.audience.role, "unknown_role");
        }
        for (auto& b : v.bindings) {
            if (is_scope_owner(b.ref.owner)) {
                report(ctx, ErrorCode::UnknownReference, b.ref.pos,
                       "view bindings name object classes, not '" + b.ref.owner + "'", b.ref.str(),
                       "dangling_reference");
                continue;
            }
            ref_type(b.ref, ctx);
        }
    }
    return out;
}

}  // namespace agora::ecl
