#include "agora/ecl/eval.hpp"

#include "agora/common/error.hpp"

namespace agora::ecl {
namespace {

[[noreturn]] void type_error(const std::string& what) { throw Error(ErrorCode::TypeMismatch, what); }

double as_double(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&v)) return *d;
    type_error("expected a number");
}

bool is_plain(const Value& v) { return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v); }

/// Ordering key for numerics of one family.
int compare(const Value& a, const Value& b) {
    if (is_plain(a) && is_plain(b)) {
        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
            auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
            return x < y ? -1 : (x > y ? 1 : 0);
        }
        double x = as_double(a), y = as_double(b);
        return x < y ? -1 : (x > y ? 1 : 0);
    }
    if (auto* m = std::get_if<Money>(&a)) {
        auto n = std::get<Money>(b);
        return m->cents < n.cents ? -1 : (m->cents > n.cents ? 1 : 0);
    }
    if (auto* d = std::get_if<Duration>(&a)) {
        auto e = std::get<Duration>(b);
        return d->ms < e.ms ? -1 : (d->ms > e.ms ? 1 : 0);
    }
    type_error("values are not ordered");
}

Value add(const Value& a, const Value& b, int sign) {
    if (is_plain(a) && is_plain(b)) {
        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
            return std::get<std::int64_t>(a) + sign * std::get<std::int64_t>(b);
        return as_double(a) + sign * as_double(b);
    }
    if (auto* m = std::get_if<Money>(&a)) return Money{m->cents + sign * std::get<Money>(b).cents};
    if (auto* d = std::get_if<Duration>(&a)) return Duration{d->ms + sign * std::get<Duration>(b).ms};
    type_error("operands cannot be added");
}

Value multiply(const Value& a, const Value& b) {
    if (is_plain(a) && is_plain(b)) {
        if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b))
            return std::get<std::int64_t>(a) * std::get<std::int64_t>(b);
        return as_double(a) * as_double(b);
    }
    auto scale = [](const Value& unit, std::int64_t k) -> Value {
        if (auto* m = std::get_if<Money>(&unit)) return Money{m->cents * k};
        if (auto* d = std::get_if<Duration>(&unit)) return Duration{d->ms * k};
        type_error("operands cannot be multiplied");
    };
    if (auto* k = std::get_if<std::int64_t>(&b)) return scale(a, *k);
    if (auto* k = std::get_if<std::int64_t>(&a)) return scale(b, *k);
    type_error("operands cannot be multiplied");
}

bool equal(const Value& a, const Value& b) {
    if (is_plain(a) && is_plain(b)) return compare(a, b) == 0;
    return a == b;
}

}  // namespace

Value evaluate(const Expr& e, const Scope& scope) {
    switch (e.kind) {
        case ExprKind::Literal: return e.literal;
        case ExprKind::EnumLiteral: return EnumValue{e.name};
        case ExprKind::ListLiteral: {
            ListValue l;
            for (auto& item : e.operands) l.items.push_back(item.name);
            return l;
        }
        case ExprKind::Ref: {
            auto v = scope.lookup(e.ref);
            if (!v) throw Error(ErrorCode::UnknownReference, "unbound reference " + e.ref.str());
            return *v;
        }
        case ExprKind::Unary: {
            Value v = evaluate(e.operands[0], scope);
            if (e.op == Op::Not) {
                auto* b = std::get_if<bool>(&v);
                if (!b) type_error("'not' needs a boolean");
                return !*b;
            }
            if (auto* i = std::get_if<std::int64_t>(&v)) return -*i;
            if (auto* d = std::get_if<double>(&v)) return -*d;
            if (auto* m = std::get_if<Money>(&v)) return Money{-m->cents};
            if (auto* d = std::get_if<Duration>(&v)) return Duration{-d->ms};
            type_error("'-' needs a number");
        }
        case ExprKind::Binary: {
            if (e.op == Op::And || e.op == Op::Or) {
                bool l = evaluate_predicate(e.operands[0], scope);
                if (e.op == Op::And && !l) return false;
                if (e.op == Op::Or && l) return true;
                return evaluate_predicate(e.operands[1], scope);
            }
            Value l = evaluate(e.operands[0], scope);
            Value r = evaluate(e.operands[1], scope);
            switch (e.op) {
                case Op::Add: return add(l, r, 1);
                case Op::Sub: return add(l, r, -1);
                case Op::Mul: return multiply(l, r);
                case Op::Eq: return equal(l, r);
                case Op::Ne: return !equal(l, r);
                case Op::Lt: return compare(l, r) < 0;
                case Op::Le: return compare(l, r) <= 0;
                case Op::Gt: return compare(l, r) > 0;
                case Op::Ge: return compare(l, r) >= 0;
                default: break;
            }
            type_error("bad binary operator");
        }
        case ExprKind::If:
            return evaluate_predicate(e.operands[0], scope) ? evaluate(e.operands[1], scope)
                                                            : evaluate(e.operands[2], scope);
    }
    type_error("bad expression");
}

bool evaluate_predicate(const Expr& expr, const Scope& scope) {
    Value v = evaluate(expr, scope);
    auto* b = std::get_if<bool>(&v);
    if (!b) type_error("predicate did not evaluate to a boolean");
    return *b;
}

}  // namespace agora::ecl
