#include "agora/ecl/parser.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "agora/ecl/resolve.hpp"

namespace agora::ecl {
namespace {

enum class Tok { Ident, String, Integer, Decimal, Money, Duration, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;  // identifier / punctuation / decoded string
    std::int64_t integer = 0;
    double decimal = 0.0;
    SourcePos pos;
};

struct SyntaxFailure {
    Diagnostic diag;
};

[[noreturn]] void fail(SourcePos pos, const std::string& message, ErrorCode kind = ErrorCode::SyntaxError,
                       std::string subject = {}) {
    throw SyntaxFailure{Diagnostic{kind, pos, message, std::move(subject)}};
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = {line_, col_};
            if (at_end()) {
                t.kind = Tok::End;
                out.push_back(t);
                return out;
            }
            char c = peek();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::Ident;
                while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
                    t.text += get();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                number(t);
            } else if (c == '$') {
                get();
                money(t);
            } else if (c == '"') {
                get();
                string(t);
            } else {
                t.kind = Tok::Punct;
                static const char* two[] = {"==", "!=", "<=", ">="};
                bool matched = false;
                for (auto* p : two) {
                    if (src_.substr(i_, 2) == p) {
                        t.text = p;
                        get();
                        get();
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    if (std::string_view("{}()[];:,.=<>+-*").find(c) == std::string_view::npos)
                        fail(t.pos, std::string("unexpected character '") + c + "'");
                    t.text = std::string(1, get());
                }
            }
            out.push_back(std::move(t));
        }
    }

private:
    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t off = 0) const { return i_ + off < src_.size() ? src_[i_ + off] : '\0'; }
    char get() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (!at_end()) {
            char c = peek();
            if (c == '#' || (c == '/' && peek(1) == '/')) {
                while (!at_end() && peek() != '\n') get();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                get();
            } else {
                return;
            }
        }
    }

    std::string digits() {
        std::string s;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) s += get();
        return s;
    }

    static std::int64_t to_int(const std::string& s, SourcePos pos) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail(pos, "integer literal out of range: " + s);
        return v;
    }

    void number(Token& t) {
        std::string whole = digits();
        bool is_decimal = false;
        std::string text = whole;
        if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
            is_decimal = true;
            text += get();
            text += digits();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            is_decimal = true;
            text += get();
            if (peek() == '+' || peek() == '-') text += get();
            text += digits();
        }
        if (is_decimal) {
            t.kind = Tok::Decimal;
            auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), t.decimal);
            if (ec != std::errc{}) fail(t.pos, "bad decimal literal: " + text);
            t.text = text;
            return;
        }
        std::int64_t v = to_int(whole, t.pos);
        // duration suffixes bind tightly: 15s, 500ms, 10m
        if (peek() == 'm' && peek(1) == 's' && !ident_char(peek(2))) {
            get();
            get();
            t.kind = Tok::Duration;
            t.integer = v;
        } else if (peek() == 's' && !ident_char(peek(1))) {
            get();
            t.kind = Tok::Duration;
            t.integer = v * 1000;
        } else if (peek() == 'm' && !ident_char(peek(1))) {
            get();
            t.kind = Tok::Duration;
            t.integer = v * 60000;
        } else {
            if (ident_char(peek())) fail(t.pos, "unexpected characters after number " + whole);
            t.kind = Tok::Integer;
            t.integer = v;
        }
        t.text = text;
    }

    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    void money(Token& t) {
        std::string whole = digits();
        if (whole.empty()) fail(t.pos, "expected digits after '$'");
        std::int64_t cents = to_int(whole, t.pos) * 100;
        if (peek() == '.') {
            get();
            std::string frac = digits();
            if (frac.empty() || frac.size() > 2) fail(t.pos, "money literals take one or two decimal places");
            if (frac.size() == 1) frac += "0";
            cents += to_int(frac, t.pos);
        }
        t.kind = Tok::Money;
        t.integer = cents;
    }

    void string(Token& t) {
        t.kind = Tok::String;
        for (;;) {
            if (at_end() || peek() == '\n') fail(t.pos, "unterminated string literal");
            char c = get();
            if (c == '"') return;
            if (c == '\\') {
                if (at_end()) fail(t.pos, "unterminated string literal");
                char e = get();
                switch (e) {
                    case 'n': t.text += '\n'; break;
                    case 't': t.text += '\t'; break;
                    case '"': t.text += '"'; break;
                    case '\\': t.text += '\\'; break;
                    default: fail(t.pos, std::string("unknown escape \\") + e);
                }
            } else {
                t.text += c;
            }
        }
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

/// Raw attribute default held until type aliases are resolved.
struct PendingDefault {
    std::size_t cls;
    std::size_t attr;
    std::optional<Expr> expr;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    ExperimentConfig document(std::vector<PendingDefault>& defaults, std::set<std::string>& seen_sections,
                              bool& has_header) {
        ExperimentConfig cfg;
        cfg.roles.clear();
        bool roles_declared = false;
        if (is_ident("ecl")) {
            has_header = true;
            next();
            const Token& v = expect(Tok::String, "format version string");
            if (v.text != kFormatVersion)
                fail(v.pos, "unsupported ECL format version \"" + v.text + "\" (expected \"" +
                                std::string(kFormatVersion) + "\")",
                     ErrorCode::UnsupportedVersion, v.text);
            cfg.format_version = v.text;
            expect_punct(";");
        }
        while (peek().kind != Tok::End) {
            const Token& kw = peek();
            if (kw.kind != Tok::Ident) fail(kw.pos, "expected a header statement or section, found '" + kw.text + "'");
            if (!has_header) fail(kw.pos, "document must start with the format version header: ecl \"1\";");
            std::string word = kw.text;
            if (word == "paradigm") {
                next();
                cfg.paradigm = expect(Tok::Ident, "paradigm identifier").text;
                if (peek().kind == Tok::String) cfg.title = next().text;
                expect_punct(";");
            } else if (word == "description") {
                next();
                cfg.description = expect(Tok::String, "description string").text;
                expect_punct(";");
            } else if (word == "roles") {
                next();
                roles_declared = true;
                do {
                    cfg.roles.push_back(expect(Tok::Ident, "role name").text);
                } while (accept_punct(","));
                expect_punct(";");
            } else if (word == "parameters" || word == "objects" || word == "actions" || word == "policies" ||
                       word == "views") {
                if (!seen_sections.insert(word).second) fail(kw.pos, "section '" + word + "' declared twice");
                next();
                expect_punct("{");
                if (word == "parameters") parameters(cfg);
                if (word == "objects") objects(cfg, defaults);
                if (word == "actions") actions(cfg);
                if (word == "policies") policies(cfg);
                if (word == "views") views(cfg);
                expect_punct("}");
            } else {
                fail(kw.pos, "unknown top-level statement '" + word + "'");
            }
        }
        if (!roles_declared) cfg.roles = {"participant"};
        return cfg;
    }

    Expr expression() { return or_expr(); }

    Expr literal_expr() {
        const Token& t = peek();
        if (t.kind == Tok::Punct && t.text == "[") {
            Expr e;
            e.kind = ExprKind::ListLiteral;
            e.pos = next().pos;
            if (!accept_punct("]")) {
                do {
                    Expr item;
                    item.kind = ExprKind::EnumLiteral;
                    item.pos = peek().pos;
                    item.name = expect(Tok::Ident, "list item").text;
                    e.operands.push_back(std::move(item));
                } while (accept_punct(","));
                expect_punct("]");
            }
            return e;
        }
        bool negative = false;
        SourcePos start = t.pos;
        if (t.kind == Tok::Punct && t.text == "-") {
            negative = true;
            next();
        }
        Expr e = primary();
        if (e.kind != ExprKind::Literal && e.kind != ExprKind::EnumLiteral) fail(start, "expected a literal value");
        if (negative) {
            if (e.kind != ExprKind::Literal) fail(start, "expected a numeric literal after '-'");
            std::visit(
                [&](auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, double>)
                        v = -v;
                    else if constexpr (std::is_same_v<T, Money>)
                        v.cents = -v.cents;
                    else if constexpr (std::is_same_v<T, Duration>)
                        v.ms = -v.ms;
                    else
                        fail(start, "'-' applies only to numeric literals");
                },
                e.literal);
        }
        e.pos = start;
        return e;
    }

    bool at_end() const { return peek().kind == Tok::End; }
    const Token& peek() const { return toks_[i_]; }

private:
    const Token& next() { return toks_[i_ < toks_.size() - 1 ? i_++ : i_]; }
    bool is_ident(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }
    bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }

    const Token& expect(Tok kind, const char* what) {
        if (peek().kind != kind) fail(peek().pos, std::string("expected ") + what + ", found " + describe(peek()));
        return next();
    }
    void expect_punct(std::string_view p) {
        if (!is_punct(p)) fail(peek().pos, "expected '" + std::string(p) + "', found " + describe(peek()));
        next();
    }
    void expect_word(std::string_view w) {
        if (!is_ident(w)) fail(peek().pos, "expected '" + std::string(w) + "', found " + describe(peek()));
        next();
    }
    bool accept_punct(std::string_view p) {
        if (!is_punct(p)) return false;
        next();
        return true;
    }
    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Tok::End: return "end of document";
            case Tok::String: return "string \"" + t.text + "\"";
            default: return "'" + t.text + "'";
        }
    }

    void parameters(ExperimentConfig& cfg) {
        while (!is_punct("}") && !at_end()) {
            const Token& name = expect(Tok::Ident, "parameter name");
            expect_punct("=");
            Expr lit = literal_expr();
            expect_punct(";");
            if (cfg.parameters.find(name.text)) fail(name.pos, "parameter '" + name.text + "' declared twice");
            Value v;
            if (lit.kind != ExprKind::Literal)
                fail(lit.pos, "parameter '" + name.text + "' needs a scalar literal");
            v = lit.literal;
            if (auto k = known_parameter_type(name.text); k && !conforms(v, TypeSpec::of(*k))) {
                fail(lit.pos, "parameter '" + name.text + "' must be " + to_string(*k), ErrorCode::TypeMismatch,
                     name.text);
            }
            cfg.parameters.entries.push_back(ParameterEntry{name.text, v, name.pos});
        }
    }

    TypeSpec type_spec() {
        const Token& t = expect(Tok::Ident, "type");
        if (t.text == "integer") return TypeSpec::of(TypeKind::Integer);
        if (t.text == "decimal") return TypeSpec::of(TypeKind::Decimal);
        if (t.text == "string") return TypeSpec::of(TypeKind::String);
        if (t.text == "boolean") return TypeSpec::of(TypeKind::Boolean);
        if (t.text == "money") return TypeSpec::of(TypeKind::Money);
        if (t.text == "duration") return TypeSpec::of(TypeKind::Duration);
        if (t.text == "enum") {
            expect_punct("(");
            TypeSpec s = TypeSpec::of(TypeKind::Enum);
            do {
                s.variants.push_back(expect(Tok::Ident, "enum variant").text);
            } while (accept_punct(","));
            expect_punct(")");
            return s;
        }
        if (t.text == "list") {
            expect_punct("(");
            TypeSpec inner = type_spec();
            expect_punct(")");
            if (inner.kind != TypeKind::Enum) fail(t.pos, "list elements must be an enum type");
            inner.kind = TypeKind::List;
            return inner;
        }
        if (is_punct(".")) {
            next();
            const Token& attr = expect(Tok::Ident, "attribute name");
            TypeSpec s = TypeSpec::of(TypeKind::Enum);
            s.alias = t.text + "." + attr.text;
            return s;
        }
        fail(t.pos, "unknown type '" + t.text + "'");
    }

    void objects(ExperimentConfig& cfg, std::vector<PendingDefault>& defaults) {
        while (!is_punct("}") && !at_end()) {
            expect_word("object");
            ObjectClass cls;
            cls.pos = peek().pos;
            cls.name = expect(Tok::Ident, "object class name").text;
            expect_punct("{");
            while (!is_punct("}") && !at_end()) {
                AttributeDef a;
                a.pos = peek().pos;
                a.name = expect(Tok::Ident, "attribute name").text;
                expect_punct(":");
                a.type = type_spec();
                std::optional<Expr> def;
                if (accept_punct("=")) def = literal_expr();
                if (is_ident("public")) {
                    next();
                    a.visibility = Visibility::Public;
                } else if (is_ident("private")) {
                    next();
                    a.visibility = Visibility::Private;
                } else if (is_ident("group")) {
                    next();
                    a.visibility = Visibility::GroupScoped;
                }
                expect_punct(";");
                defaults.push_back(PendingDefault{cfg.objects.size(), cls.attributes.size(), std::move(def)});
                cls.attributes.push_back(std::move(a));
            }
            expect_punct("}");
            cfg.objects.push_back(std::move(cls));
        }
    }

    AttributeRef attribute_ref() {
        AttributeRef r;
        r.pos = peek().pos;
        r.owner = expect(Tok::Ident, "object or scope name").text;
        expect_punct(".");
        r.attribute = expect(Tok::Ident, "attribute name").text;
        return r;
    }

    void actions(ExperimentConfig& cfg) {
        while (!is_punct("}") && !at_end()) {
            expect_word("action");
            ActionDef a;
            a.pos = peek().pos;
            a.name = expect(Tok::Ident, "action name").text;
            expect_word("by");
            a.actor_role = expect(Tok::Ident, "actor role").text;
            expect_punct("{");
            while (!is_punct("}") && !at_end()) {
                const Token& kw = expect(Tok::Ident, "'arg', 'cost' or 'effect'");
                if (kw.text == "arg") {
                    ArgDef arg;
                    arg.name = expect(Tok::Ident, "argument name").text;
                    expect_punct(":");
                    arg.type = type_spec();
                    a.args.push_back(std::move(arg));
                } else if (kw.text == "cost" || kw.text == "effect") {
                    AttributeDelta d;
                    d.target = attribute_ref();
                    expect_punct("=");
                    d.amount = expression();
                    (kw.text == "cost" ? a.costs : a.effects).push_back(std::move(d));
                } else {
                    fail(kw.pos, "expected 'arg', 'cost' or 'effect', found '" + kw.text + "'");
                }
                expect_punct(";");
            }
            expect_punct("}");
            cfg.actions.push_back(std::move(a));
        }
    }

    void policies(ExperimentConfig& cfg) {
        while (!is_punct("}") && !at_end()) {
            const Token& kw = expect(Tok::Ident, "'precondition' or 'rule'");
            PolicyDef p;
            p.pos = kw.pos;
            if (kw.text == "precondition") {
                p.kind = PolicyKind::Precondition;
                p.name = expect(Tok::Ident, "policy name").text;
                expect_word("on");
                do {
                    p.actions.push_back(expect(Tok::Ident, "action name").text);
                } while (accept_punct(","));
            } else if (kw.text == "rule") {
                p.kind = PolicyKind::GlobalRule;
                p.name = expect(Tok::Ident, "policy name").text;
            } else {
                fail(kw.pos, "expected 'precondition' or 'rule', found '" + kw.text + "'");
            }
            expect_punct("{");
            expect_word("require");
            p.predicate = expression();
            expect_punct(";");
            expect_word("deny");
            p.deny_message = expect(Tok::String, "deny message").text;
            expect_punct(";");
            expect_punct("}");
            cfg.policies.push_back(std::move(p));
        }
    }

    void views(ExperimentConfig& cfg) {
        while (!is_punct("}") && !at_end()) {
            expect_word("view");
            ViewDef v;
            v.pos = peek().pos;
            const Token& slot = expect(Tok::Ident, "module slot");
            auto s = slot_from_string(slot.text);
            if (!s) fail(slot.pos, "unknown module slot '" + slot.text +
                                       "' (expected my_status, my_actions, my_tasks, social or dashboard)");
            v.slot = *s;
            expect_word("for");
            const Token& aud = expect(Tok::Ident, "audience");
            if (aud.text == "all") {
                v.audience.kind = Audience::Kind::All;
            } else if (aud.text == "humans") {
                v.audience.kind = Audience::Kind::Humans;
            } else if (aud.text == "agents") {
                v.audience.kind = Audience::Kind::Agents;
            } else if (aud.text == "role") {
                v.audience.kind = Audience::Kind::Role;
                expect_punct("(");
                v.audience.role = expect(Tok::Ident, "role name").text;
                expect_punct(")");
            } else {
                fail(aud.pos, "unknown audience '" + aud.text + "' (expected all, humans, agents or role(name))");
            }
            expect_punct("{");
            while (!is_punct("}") && !at_end()) {
                ViewBinding b;
                b.ref = attribute_ref();
                expect_word("as");
                b.label = expect(Tok::String, "display label").text;
                expect_punct(";");
                v.bindings.push_back(std::move(b));
            }
            expect_punct("}");
            cfg.views.push_back(std::move(v));
        }
    }

    // expression grammar, loosest binding first
    Expr binary(Op op, Expr lhs, Expr rhs, SourcePos pos) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.op = op;
        e.pos = pos;
        e.operands.push_back(std::move(lhs));
        e.operands.push_back(std::move(rhs));
        return e;
    }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (is_ident("or")) {
            SourcePos pos = next().pos;
            lhs = binary(Op::Or, std::move(lhs), and_expr(), pos);
        }
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (is_ident("and")) {
            SourcePos pos = next().pos;
            lhs = binary(Op::And, std::move(lhs), not_expr(), pos);
        }
        return lhs;
    }

    Expr not_expr() {
        if (is_ident("not")) {
            Expr e;
            e.kind = ExprKind::Unary;
            e.op = Op::Not;
            e.pos = next().pos;
            e.operands.push_back(not_expr());
            return e;
        }
        return comparison();
    }

    Expr comparison() {
        Expr lhs = sum();
        static const std::pair<const char*, Op> ops[] = {{"==", Op::Eq}, {"!=", Op::Ne}, {"<=", Op::Le},
                                                         {">=", Op::Ge}, {"<", Op::Lt},  {">", Op::Gt}};
        for (auto& [sym, op] : ops) {
            if (is_punct(sym)) {
                SourcePos pos = next().pos;
                Expr rhs = sum();
                for (auto& [sym2, op2] : ops)
                    if (is_punct(sym2)) fail(peek().pos, "comparisons do not chain; add parentheses");
                return binary(op, std::move(lhs), std::move(rhs), pos);
            }
        }
        return lhs;
    }

    Expr sum() {
        Expr lhs = product();
        while (is_punct("+") || is_punct("-")) {
            Op op = peek().text == "+" ? Op::Add : Op::Sub;
            SourcePos pos = next().pos;
            lhs = binary(op, std::move(lhs), product(), pos);
        }
        return lhs;
    }

    Expr product() {
        Expr lhs = unary();
        while (is_punct("*")) {
            SourcePos pos = next().pos;
            lhs = binary(Op::Mul, std::move(lhs), unary(), pos);
        }
        return lhs;
    }

    Expr unary() {
        if (is_punct("-")) {
            Expr e;
            e.kind = ExprKind::Unary;
            e.op = Op::Neg;
            e.pos = next().pos;
            e.operands.push_back(unary());
            return e;
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        Expr e;
        e.pos = t.pos;
        switch (t.kind) {
            case Tok::Integer:
                e.literal = next().integer;
                return e;
            case Tok::Decimal:
                e.literal = next().decimal;
                return e;
            case Tok::Money:
                e.literal = Money{next().integer};
                return e;
            case Tok::Duration:
                e.literal = Duration{next().integer};
                return e;
            case Tok::String:
                e.literal = next().text;
                return e;
            case Tok::Punct:
                if (t.text == "(") {
                    next();
                    Expr inner = expression();
                    expect_punct(")");
                    return inner;
                }
                fail(t.pos, "unexpected '" + t.text + "' in expression");
            case Tok::Ident: {
                if (t.text == "true" || t.text == "false") {
                    e.literal = next().text == "true";
                    return e;
                }
                if (t.text == "if") {
                    next();
                    e.kind = ExprKind::If;
                    e.operands.push_back(expression());
                    expect_word("then");
                    e.operands.push_back(expression());
                    expect_word("else");
                    e.operands.push_back(expression());
                    return e;
                }
                static const std::set<std::string> reserved{"and", "or", "not", "then", "else"};
                if (reserved.count(t.text)) fail(t.pos, "unexpected keyword '" + t.text + "' in expression");
                std::string word = next().text;
                if (is_punct(".")) {
                    next();
                    e.kind = ExprKind::Ref;
                    e.ref.owner = word;
                    e.ref.pos = t.pos;
                    e.ref.attribute = expect(Tok::Ident, "attribute name").text;
                    return e;
                }
                e.kind = ExprKind::EnumLiteral;
                e.name = word;
                return e;
            }
            case Tok::End: fail(t.pos, "unexpected end of document in expression");
        }
        fail(t.pos, "unexpected token");
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

Value zero_value(const TypeSpec& t) {
    switch (t.kind) {
        case TypeKind::Integer: return std::int64_t{0};
        case TypeKind::Decimal: return 0.0;
        case TypeKind::String: return std::string{};
        case TypeKind::Boolean: return false;
        case TypeKind::Money: return Money{};
        case TypeKind::Duration: return Duration{};
        case TypeKind::Enum: return EnumValue{t.variants.empty() ? std::string{} : t.variants.front()};
        case TypeKind::List: return ListValue{};
    }
    return std::int64_t{0};
}

/// Converts a literal expression to a value of `type`, or returns nullopt.
std::optional<Value> literal_value(const Expr& e, const TypeSpec& type) {
    Value v;
    if (e.kind == ExprKind::Literal) {
        v = e.literal;
        // integers widen to decimal
        if (type.kind == TypeKind::Decimal)
            if (auto* i = std::get_if<std::int64_t>(&v)) v = static_cast<double>(*i);
    } else if (e.kind == ExprKind::EnumLiteral) {
        v = EnumValue{e.name};
    } else if (e.kind == ExprKind::ListLiteral) {
        ListValue l;
        for (auto& item : e.operands) l.items.push_back(item.name);
        v = std::move(l);
    } else {
        return std::nullopt;
    }
    if (!conforms(v, type)) return std::nullopt;
    return v;
}

/// Follows `Class.attribute` aliases to a concrete enum domain.
bool resolve_alias(const ExperimentConfig& cfg, TypeSpec& type, int depth = 0) {
    if (type.alias.empty()) return true;
    auto dot = type.alias.find('.');
    if (dot == std::string::npos || depth > 8) return false;
    const ObjectClass* cls = cfg.find_class(type.alias.substr(0, dot));
    if (!cls) return false;
    const AttributeDef* attr = cls->find(type.alias.substr(dot + 1));
    if (!attr || attr->type.kind != TypeKind::Enum) return false;
    TypeSpec target = attr->type;
    if (!resolve_alias(cfg, target, depth + 1)) return false;
    type.variants = target.variants;
    return true;
}

}  // namespace

ParseResult parse_config(std::string_view text) {
    ParseResult result;
    std::set<std::string> seen;
    bool has_header = false;
    std::vector<PendingDefault> defaults;
    ExperimentConfig cfg;
    bool blank = true;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
    try {
        Parser p(Lexer(text).run());
        cfg = p.document(defaults, seen, has_header);
    } catch (const SyntaxFailure& f) {
        result.diagnostics.push_back(f.diag);
        return result;
    }

    std::string missing;
    for (const char* s : {"objects", "actions", "policies", "views"}) {
        if (!seen.count(s)) missing += missing.empty() ? s : std::string(", ") + s;
    }
    if (!missing.empty()) {
        result.diagnostics.push_back(Diagnostic{ErrorCode::SyntaxError, {1, 1},
                                                "missing required sections: " + missing, missing});
    }
    if (!has_header && !blank) {
        result.diagnostics.push_back(
            Diagnostic{ErrorCode::SyntaxError, {1, 1}, "missing format version header: ecl \"1\";", "ecl"});
    }
    if (!result.diagnostics.empty()) return result;
    for (auto& name : required_parameters()) {
        if (!cfg.parameters.find(name))
            result.diagnostics.push_back(
                Diagnostic{ErrorCode::SyntaxError, {1, 1}, "missing required parameter '" + name + "'", name});
    }

    // attribute types first (aliases may point at classes declared later), then defaults
    for (auto& cls : cfg.objects) {
        for (auto& attr : cls.attributes) {
            if (!resolve_alias(cfg, attr.type))
                result.diagnostics.push_back(Diagnostic{ErrorCode::UnknownReference, attr.pos,
                                                        "type alias '" + attr.type.alias +
                                                            "' does not name an enum attribute",
                                                        attr.type.alias});
        }
    }
    for (auto& pd : defaults) {
        AttributeDef& attr = cfg.objects[pd.cls].attributes[pd.attr];
        if (!pd.expr) {
            attr.default_value = zero_value(attr.type);
            continue;
        }
        if (auto v = literal_value(*pd.expr, attr.type)) {
            attr.default_value = *v;
        } else {
            result.diagnostics.push_back(Diagnostic{ErrorCode::TypeMismatch, pd.expr->pos,
                                                    "default of " + cfg.objects[pd.cls].name + "." + attr.name +
                                                        " does not conform to " + describe(attr.type),
                                                    cfg.objects[pd.cls].name + "." + attr.name});
        }
    }
    for (auto& action : cfg.actions) {
        for (auto& arg : action.args) {
            if (!resolve_alias(cfg, arg.type))
                result.diagnostics.push_back(Diagnostic{ErrorCode::UnknownReference, action.pos,
                                                        "type alias '" + arg.type.alias + "' of " + action.name +
                                                            "." + arg.name + " does not name an enum attribute",
                                                        arg.type.alias});
        }
    }
    if (!result.diagnostics.empty()) return result;

    auto resolution = resolve_config(cfg);
    result.diagnostics.insert(result.diagnostics.end(), resolution.begin(), resolution.end());
    if (result.diagnostics.empty()) result.config = std::move(cfg);
    return result;
}

ExperimentConfig compile_or_throw(std::string_view text) {
    auto r = parse_config(text);
    if (!r.ok()) {
        std::string msg;
        for (auto& d : r.diagnostics) msg += (msg.empty() ? "" : "; ") + format_diagnostic(d);
        throw Error(ErrorCode::InvalidConfig, msg);
    }
    return std::move(*r.config);
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return compile_or_throw(ss.str());
}

Expr parse_expression(std::string_view text) {
    try {
        Parser p(Lexer(text).run());
        Expr e = p.expression();
        if (!p.at_end()) fail(p.peek().pos, "trailing input after expression");
        return e;
    } catch (const SyntaxFailure& f) {
        throw Error(f.diag.kind, format_diagnostic(f.diag));
    }
}

Value parse_literal(std::string_view text, const TypeSpec& type) {
    try {
        Parser p(Lexer(text).run());
        Expr e = p.literal_expr();
        if (!p.at_end()) fail(p.peek().pos, "trailing input after literal");
        if (auto v = literal_value(e, type)) return *v;
        throw Error(ErrorCode::TypeMismatch, "literal '" + std::string(text) + "' is not a " + describe(type));
    } catch (const SyntaxFailure& f) {
        throw Error(f.diag.kind, format_diagnostic(f.diag));
    }
}

std::string format_diagnostic(const Diagnostic& d) {
    return std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " + std::string(to_string(d.kind)) +
           ": " + d.message;
}

json diagnostics_to_json(const std::vector<Diagnostic>& diagnostics) {
    json arr = json::array();
    for (auto& d : diagnostics) {
        arr.push_back({{"kind", to_string(d.kind)},
                       {"line", d.pos.line},
                       {"column", d.pos.column},
                       {"message", d.message},
                       {"subject", d.subject}});
    }
    return arr;
}

}  // namespace agora::ecl
