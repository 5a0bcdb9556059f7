#include <algorithm>
#include <fstream>
#include <sstream>

#include "agora/ecl/eval.hpp"
#include "agora/ecl/parser.hpp"
#include "agora/ecl/serializer.hpp"
#include "agora/ecl/validator.hpp"
#include "agora/ecl/views.hpp"
#include "doctest.h"
#include "ecl_generator.hpp"

using namespace agora;
using namespace agora::ecl;

namespace {

std::string read_asset(const std::string& rel) {
    std::ifstream in(std::string(AGORA_ASSET_DIR) + "/" + rel);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig shape_factory() { return compile_or_throw(read_asset("paradigms/shape_factory.ecl")); }

const char* kMinimal = R"(ecl "1";
parameters { starting_money = $100; session_duration = 60s; participant_count = 2; }
objects {
  object Participant { wealth: money public; secret: integer private; }
}
actions {}
policies {}
views {}
)";

std::string with_views(const std::string& views) {
    std::string doc = kMinimal;
    auto at = doc.find("views {}");
    return doc.replace(at, 8, "views {" + views + "}");
}

bool has_code(const ValidationReport& r, const std::string& code) {
    return std::any_of(r.conflicts.begin(), r.conflicts.end(), [&](auto& c) { return c.code == code; });
}

class MapScope : public Scope {
public:
    std::map<std::string, Value> values;
    std::optional<Value> lookup(const AttributeRef& ref) const override {
        auto it = values.find(ref.str());
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

}  // namespace

TEST_CASE("shape factory parses into the documented object classes") {
    auto cfg = shape_factory();
    REQUIRE(cfg.find_class("Money"));
    REQUIRE(cfg.find_class("Shape"));
    auto* shape = cfg.find_class("Shape");
    std::vector<std::string> attrs;
    for (auto& a : shape->attributes) attrs.push_back(a.name);
    CHECK(attrs == std::vector<std::string>{"type", "regular_cost", "specialty_cost", "time_cost", "production_status"});
    CHECK(cfg.shape_types() == std::vector<std::string>{"circle", "square", "triangle"});
    CHECK(cfg.parameters.perception_interval().ms == 15000);
    CHECK(cfg.parameters.participant_count() == 6);
    CHECK(cfg.find_action("produce_shape")->required_policies == std::vector<std::string>{"max_production"});
}

TEST_CASE("two-class document yields two object classes") {
    auto r = parse_config(R"(ecl "1";
parameters { starting_money = $1; session_duration = 1s; participant_count = 1; }
objects {
  object Money { initial_value: money = $300; }
  object Shape { type: enum(circle, square); regular_cost: money; specialty_cost: money; time_cost: duration; production_status: boolean; }
}
actions {} policies {} views {})");
    REQUIRE(r.ok());
    CHECK(r.config->objects.size() == 2);
}

TEST_CASE("empty document lists the four missing sections") {
    auto r = parse_config("");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == ErrorCode::SyntaxError);
    CHECK(r.diagnostics[0].message.find("objects, actions, policies, views") != std::string::npos);
}

TEST_CASE("cost referencing an undeclared object is an UnknownReference naming it") {
    std::string doc = kMinimal;
    doc.replace(doc.find("actions {}"), 10,
                "actions { action ProduceAction by participant { cost actor.wealth = Gold.price; } }");
    auto r = parse_config(doc);
    REQUIRE_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == ErrorCode::UnknownReference);
    CHECK(r.diagnostics[0].subject == "Gold");
    CHECK(r.diagnostics[0].pos.line == 6);
}

TEST_CASE("diagnostics carry line and column") {
    auto r = parse_config("ecl \"1\";\nobjects {\n  object X { a: nosuchtype; }\n}");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].pos.line == 3);
    CHECK(r.diagnostics[0].pos.column == 17);
    CHECK(format_diagnostic(r.diagnostics[0]).rfind("3:17: SyntaxError:", 0) == 0);
}

TEST_CASE("type mismatch between cost and attribute") {
    std::string doc = kMinimal;
    doc.replace(doc.find("actions {}"), 10, "actions { action a by participant { cost actor.wealth = 5s; } }");
    auto r = parse_config(doc);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == ErrorCode::TypeMismatch);
}

TEST_CASE("unknown format version is rejected") {
    auto r = parse_config("ecl \"2\"; objects {} actions {} policies {} views {}");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].kind == ErrorCode::UnsupportedVersion);
}

TEST_CASE("document without a header is rejected") {
    auto r = parse_config("objects {} actions {} policies {} views {}");
    REQUIRE_FALSE(r.diagnostics.empty());
    CHECK(r.diagnostics[0].message.find("ecl \"1\"") != std::string::npos);
}

TEST_CASE("bundled paradigms validate with zero conflicts") {
    for (const char* file : {"paradigms/shape_factory.ecl", "paradigms/daytrader.ecl"}) {
        CAPTURE(file);
        auto r = parse_config(read_asset(file));
        for (auto& d : r.diagnostics) MESSAGE(format_diagnostic(d));
        REQUIRE(r.ok());
        auto report = validate_config(*r.config);
        CHECK_MESSAGE(report.valid(), report.render());
    }
}

TEST_CASE("duplicate object class is exactly one conflict") {
    auto cfg = shape_factory();
    cfg.objects.push_back(*cfg.find_class("Shape"));
    auto report = validate_config(cfg);
    REQUIRE(report.conflicts.size() == 1);
    CHECK(report.conflicts[0].code == "duplicate_object_class");
    CHECK(report.conflicts[0].message.find("duplicate object class") != std::string::npos);
}

TEST_CASE("private attribute bound for all in a shared slot is one privacy violation") {
    auto cfg = compile_or_throw(with_views("view dashboard for all { Participant.secret as \"S\"; }"));
    auto report = validate_config(cfg);
    REQUIRE(report.conflicts.size() == 1);
    CHECK(report.conflicts[0].code == "privacy_violation");
    CHECK(report.conflicts[0].message.find("privacy violation") != std::string::npos);

    auto own = compile_or_throw(with_views("view my_status for all { Participant.secret as \"S\"; }"));
    CHECK(validate_config(own).valid());
}

TEST_CASE("policy naming a missing action is a conflict") {
    auto cfg = shape_factory();
    cfg.policies.front().actions.push_back("teleport");
    auto report = validate_config(cfg);
    CHECK(has_code(report, "policy_missing_action"));
}

TEST_CASE("validator flags engine-managed targets and parameter invariants") {
    auto cfg = shape_factory();
    cfg.parameters.set("price_min", Money{20000});
    CHECK(has_code(validate_config(cfg), "parameter_invariant"));

    cfg = shape_factory();
    cfg.parameters.set("specialty_cost", Money{4000});
    CHECK(has_code(validate_config(cfg), "parameter_invariant"));

    cfg = shape_factory();
    auto& act = const_cast<ActionDef&>(*cfg.find_action("fulfill_order"));
    act.effects.push_back(AttributeDelta{AttributeRef{"actor", "orders_fulfilled", {}}, parse_expression("1")});
    CHECK(has_code(validate_config(cfg), "engine_managed_attribute"));
}

TEST_CASE("enum variants keep declaration order through a round trip") {
    auto cfg = compile_or_throw(R"(ecl "1";
parameters { starting_money = $1; session_duration = 1s; participant_count = 1; }
objects { object Participant { mood: enum(zeta, alpha, mid) = mid; } }
actions {} policies {} views {})");
    auto again = compile_or_throw(serialize_config(cfg));
    CHECK(again.find_class("Participant")->find("mood")->type.variants == std::vector<std::string>{"zeta", "alpha", "mid"});
    CHECK(again == cfg);
}

TEST_CASE("empty policies section is written explicitly") {
    auto cfg = compile_or_throw(kMinimal);
    auto text = serialize_config(cfg);
    CHECK(text.find("\npolicies {\n}\n") != std::string::npos);
    CHECK(compile_or_throw(text) == cfg);
}

TEST_CASE("bundled paradigms round trip") {
    for (const char* file : {"paradigms/shape_factory.ecl", "paradigms/daytrader.ecl"}) {
        auto cfg = compile_or_throw(read_asset(file));
        auto text = serialize_config(cfg);
        auto again = parse_config(text);
        for (auto& d : again.diagnostics) MESSAGE(format_diagnostic(d));
        REQUIRE(again.ok());
        CHECK(*again.config == cfg);
        CHECK(serialize_config(*again.config) == text);
    }
}

TEST_CASE("parsing is deterministic") {
    auto text = read_asset("paradigms/shape_factory.ecl");
    CHECK(compile_or_throw(text) == compile_or_throw(text));
    CHECK(serialize_config(compile_or_throw(text)) == serialize_config(compile_or_throw(text)));
}

TEST_CASE("generated configs are valid and round trip") {
    SeededStream rng(7);
    for (int i = 0; i < 200; ++i) {
        CAPTURE(i);
        auto cfg = testkit::generate_config(rng);
        auto report = validate_config(cfg);
        REQUIRE_MESSAGE(report.valid(), report.render());
        auto text = serialize_config(cfg);
        auto r = parse_config(text);
        if (!r.ok()) {
            for (auto& d : r.diagnostics) MESSAGE(format_diagnostic(d));
            MESSAGE(text);
        }
        REQUIRE(r.ok());
        CHECK(*r.config == cfg);
    }
}

TEST_CASE("expression printing parses back to the same tree") {
    SeededStream rng(11);
    for (int i = 0; i < 2000; ++i) {
        TypeKind k = std::array{TypeKind::Integer, TypeKind::Decimal, TypeKind::Money, TypeKind::Duration,
                                TypeKind::Boolean}[i % 5];
        auto e = testkit::generate_expression(rng, k, 5);
        auto text = serialize_expression(e);
        CAPTURE(text);
        CHECK(parse_expression(text) == e);
    }
}

TEST_CASE("closure: mutating one reference is flagged") {
    auto base = shape_factory();
    std::vector<std::function<void(ExperimentConfig&)>> mutations{
        [](auto& c) { const_cast<ActionDef*>(c.find_action("produce_shape"))->costs[0].amount.operands[1].ref.attribute = "qty"; },
        [](auto& c) { const_cast<ActionDef*>(c.find_action("fulfill_order"))->effects[0].target.attribute = "welth"; },
        [](auto& c) { c.policies[0].actions[0] = "produce_shapes"; },
        [](auto& c) { c.policies[1].predicate.operands[0].ref.owner = "sesion"; },
        [](auto& c) { c.views[0].bindings[0].ref.owner = "Participants"; },
        [](auto& c) { c.views[1].bindings[1].ref.attribute = "specialty"; },
        [](auto& c) { c.find_class("Participant"); const_cast<ObjectClass*>(c.find_class("Shape"))->name = "Shapes"; },
        [](auto& c) { const_cast<ActionDef*>(c.find_action("propose_trade_offer"))->args[1].type.alias = "Shape.kind"; },
    };
    for (std::size_t i = 0; i < mutations.size(); ++i) {
        CAPTURE(i);
        auto cfg = base;
        mutations[i](cfg);
        CHECK_FALSE(validate_config(cfg).valid());
    }
}

TEST_CASE("resolve_views for a human fills all five slots") {
    auto cfg = shape_factory();
    auto slots = resolve_views(cfg, Viewer{"P1", ParticipantKind::Human, "participant", "A"});
    REQUIRE(slots.size() == 5);
    for (auto& s : slots) CHECK_FALSE(s.bindings.empty());
    CHECK(slots[4].slot == ModuleSlot::Dashboard);

    auto off = resolve_views(cfg, Viewer{"P1", ParticipantKind::Human, "participant", "A"}, ViewOverlay{false, {}});
    CHECK(off[4].bindings.empty());
}

TEST_CASE("agent-only binding is absent for a human viewer") {
    auto cfg = compile_or_throw(with_views("view my_status for agents { Participant.wealth as \"W\"; }"));
    auto human = resolve_views(cfg, Viewer{"P1", ParticipantKind::Human, "participant", ""});
    CHECK(human[0].bindings.empty());
    auto agent = resolve_views(cfg, Viewer{"P2", ParticipantKind::Agent, "participant", ""});
    CHECK(agent[0].bindings.size() == 1);
    CHECK_THROWS_AS(resolve_views(cfg, Viewer{"P1", ParticipantKind::Human, "judge", ""}), Error);
}

TEST_CASE("resolve_views never places a private attribute in a shared slot") {
    SeededStream rng(99);
    for (int i = 0; i < 100; ++i) {
        auto cfg = testkit::generate_config(rng);
        for (auto kind : {ParticipantKind::Human, ParticipantKind::Agent}) {
            for (auto& role : cfg.roles) {
                for (auto& s : resolve_views(cfg, Viewer{"P1", kind, role, "g"})) {
                    if (is_owner_slot(s.slot)) continue;
                    for (auto& b : s.bindings) CHECK(b.visibility != Visibility::Private);
                }
            }
        }
    }
}

TEST_CASE("evaluator arithmetic and short circuit") {
    MapScope s;
    s.values["actor.wealth"] = Money{1000};
    s.values["args.quantity"] = std::int64_t{3};
    CHECK(evaluate(parse_expression("actor.wealth - $2.50 * args.quantity"), s) == Value{Money{250}});
    CHECK(evaluate(parse_expression("1 + 2.5"), s) == Value{3.5});
    CHECK(evaluate(parse_expression("if args.quantity > 2 then 10s else 500ms"), s) == Value{Duration{10000}});
    CHECK(evaluate(parse_expression("false and missing.value"), s) == Value{false});
    CHECK_THROWS_AS(evaluate(parse_expression("missing.value"), s), Error);
}

TEST_CASE("literal parsing for overrides") {
    CHECK(parse_literal("$12.50", TypeSpec::of(TypeKind::Money)) == Value{Money{1250}});
    CHECK(parse_literal("15s", TypeSpec::of(TypeKind::Duration)) == Value{Duration{15000}});
    CHECK(parse_literal("10m", TypeSpec::of(TypeKind::Duration)) == Value{Duration{600000}});
    CHECK(parse_literal("3", TypeSpec::of(TypeKind::Decimal)) == Value{3.0});
    CHECK_THROWS_AS(parse_literal("$1.234", TypeSpec::of(TypeKind::Money)), Error);
    CHECK_THROWS_AS(parse_literal("circle", TypeSpec::enumeration({"square"})), Error);
}
