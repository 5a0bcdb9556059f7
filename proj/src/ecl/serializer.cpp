#include "agora/ecl/serializer.hpp"

#include <sstream>

namespace agora::ecl {
namespace {

constexpr int kIf = 0;
constexpr int kOr = 1;
constexpr int kAnd = 2;
constexpr int kNot = 3;
constexpr int kCmp = 4;
constexpr int kSum = 5;
constexpr int kProduct = 6;
constexpr int kUnary = 7;
constexpr int kPrimary = 8;

int level(const Expr& e) {
    switch (e.kind) {
        case ExprKind::If: return kIf;
        case ExprKind::Unary: return e.op == Op::Not ? kNot : kUnary;
        case ExprKind::Binary:
            switch (e.op) {
                case Op::Or: return kOr;
                case Op::And: return kAnd;
                case Op::Add:
                case Op::Sub: return kSum;
                case Op::Mul: return kProduct;
                default: return kCmp;
            }
        default: return kPrimary;
    }
}

void write(std::ostream& os, const Expr& e, int min_level);

void write_wrapped(std::ostream& os, const Expr& e, int min_level) {
    if (level(e) < min_level) {
        os << '(';
        write(os, e, kIf);
        os << ')';
    } else {
        write(os, e, min_level);
    }
}

void write(std::ostream& os, const Expr& e, int /*min_level*/) {
    switch (e.kind) {
        case ExprKind::Literal: os << serialize_literal(e.literal); return;
        case ExprKind::EnumLiteral: os << e.name; return;
        case ExprKind::ListLiteral: {
            os << '[';
            for (std::size_t i = 0; i < e.operands.size(); ++i) os << (i ? ", " : "") << e.operands[i].name;
            os << ']';
            return;
        }
        case ExprKind::Ref: os << e.ref.owner << '.' << e.ref.attribute; return;
        case ExprKind::Unary:
            if (e.op == Op::Not) {
                os << "not ";
                write_wrapped(os, e.operands[0], kNot);
            } else {
                os << '-';
                write_wrapped(os, e.operands[0], kUnary);
            }
            return;
        case ExprKind::Binary: {
            int l = level(e);
            // left-associative chains; comparisons do not chain at all
            write_wrapped(os, e.operands[0], l == kCmp ? l + 1 : l);
            os << ' ' << op_symbol(e.op) << ' ';
            write_wrapped(os, e.operands[1], l + 1);
            return;
        }
        case ExprKind::If:
            os << "if ";
            write(os, e.operands[0], kIf);
            os << " then ";
            write(os, e.operands[1], kIf);
            os << " else ";
            write(os, e.operands[2], kIf);
            return;
    }
}

std::string type_text(const TypeSpec& t) { return describe(t); }

}  // namespace

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out + "\"";
}

std::string serialize_literal(const Value& value) {
    struct V {
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_decimal(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return quote(s); }
        std::string operator()(Money m) const { return format_money(m); }
        std::string operator()(Duration d) const {
            return d.ms < 0 ? "-" + format_duration(Duration{-d.ms}) : format_duration(d);
        }
        std::string operator()(const EnumValue& e) const { return e.variant; }
        std::string operator()(const ListValue& l) const {
            std::string s = "[";
            for (std::size_t i = 0; i < l.items.size(); ++i) s += (i ? ", " : "") + l.items[i];
            return s + "]";
        }
    };
    return std::visit(V{}, value);
}

std::string serialize_expression(const Expr& expr) {
    std::ostringstream os;
    write(os, expr, kIf);
    return os.str();
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "ecl " << quote(c.format_version) << ";\n";
    if (!c.paradigm.empty()) {
        os << "paradigm " << c.paradigm;
        if (!c.title.empty()) os << ' ' << quote(c.title);
        os << ";\n";
    }
    if (!c.description.empty()) os << "description " << quote(c.description) << ";\n";
    if (!c.roles.empty()) {
        os << "roles ";
        for (std::size_t i = 0; i < c.roles.size(); ++i) os << (i ? ", " : "") << c.roles[i];
        os << ";\n";
    }

    os << "\nparameters {\n";
    for (auto& p : c.parameters.entries) os << "  " << p.name << " = " << serialize_literal(p.value) << ";\n";
    os << "}\n";

    os << "\nobjects {\n";
    for (std::size_t i = 0; i < c.objects.size(); ++i) {
        auto& cls = c.objects[i];
        if (i) os << '\n';
        os << "  object " << cls.name << " {\n";
        for (auto& a : cls.attributes) {
            os << "    " << a.name << ": " << type_text(a.type) << " = " << serialize_literal(a.default_value) << ' '
               << to_string(a.visibility) << ";\n";
        }
        os << "  }\n";
    }
    os << "}\n";

    os << "\nactions {\n";
    for (std::size_t i = 0; i < c.actions.size(); ++i) {
        auto& a = c.actions[i];
        if (i) os << '\n';
        os << "  action " << a.name << " by " << a.actor_role << " {\n";
        for (auto& arg : a.args) os << "    arg " << arg.name << ": " << type_text(arg.type) << ";\n";
        for (auto& d : a.costs)
            os << "    cost " << d.target.str() << " = " << serialize_expression(d.amount) << ";\n";
        for (auto& d : a.effects)
            os << "    effect " << d.target.str() << " = " << serialize_expression(d.amount) << ";\n";
        os << "  }\n";
    }
    os << "}\n";

    os << "\npolicies {\n";
    for (std::size_t i = 0; i < c.policies.size(); ++i) {
        auto& p = c.policies[i];
        if (i) os << '\n';
        if (p.kind == PolicyKind::Precondition) {
            os << "  precondition " << p.name << " on ";
            for (std::size_t j = 0; j < p.actions.size(); ++j) os << (j ? ", " : "") << p.actions[j];
        } else {
            os << "  rule " << p.name;
        }
        os << " {\n    require " << serialize_expression(p.predicate) << ";\n    deny " << quote(p.deny_message)
           << ";\n  }\n";
    }
    os << "}\n";

    os << "\nviews {\n";
    for (std::size_t i = 0; i < c.views.size(); ++i) {
        auto& v = c.views[i];
        if (i) os << '\n';
        os << "  view " << to_string(v.slot) << " for " << v.audience.str() << " {\n";
        for (auto& b : v.bindings) os << "    " << b.ref.str() << " as " << quote(b.label) << ";\n";
        os << "  }\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace agora::ecl
