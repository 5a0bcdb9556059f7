#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "acp_corpus.hpp"
#include "agora/agents/llm.hpp"
#include "agora/agents/scripted.hpp"
#include "agora/engine/replay.hpp"
#include "agora/sim/simulator.hpp"
#include "engine_fixtures.hpp"

using namespace agora;
using namespace agora::agents;

namespace {

agents::PromptTemplate shape_factory_prompt() {
    return PromptTemplate::load(testkit::asset_path("prompts/shape_factory.txt"));
}

struct Seat {
    acp::AgentContext ctx;
    acp::StateSummary summary;
};

const std::string kPersona = json{{"personality_name", "Architect"},
                                  {"mbti_type", "INTJ"},
                                  {"personality_description", "Imaginative and strategic thinker"}}
                                 .dump();

Seat seat(const std::string& pid, const controls::InteractionControls& c = {}) {
    auto s = testkit::acp_corpus_session(c);
    Seat out{acp::build_agent_context(s, pid), {}};
    out.ctx.persona_profile = kPersona;
    acp::SummaryCursor cursor;
    out.summary = acp::compose_state_summary(s, out.ctx, 0, cursor);
    return out;
}

/// Chat-completions stub on a loopback port; `handler` decides each answer.
class StubEndpoint {
public:
    explicit StubEndpoint(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++hits;
            last_auth = req.get_header_value("Authorization");
            last_body = req.body;
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubEndpoint() {
        server_.stop();
        thread_.join();
    }
    CompletionEndpointConfig config() const {
        CompletionEndpointConfig c;
        c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        c.api_key_env = "AGORA_TEST_LLM_KEY";
        c.timeout = Duration{2000};
        return c;
    }
    std::atomic<int> hits{0};
    std::string last_auth, last_body;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

json completion(const std::string& content) {
    return {{"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}}};
}

const std::string kSecret = "sk-test-should-never-leak-9f3a";

}  // namespace

TEST_CASE("prompt template renders persona and parameters") {
    auto t = shape_factory_prompt();
    auto [ctx, summary] = seat("A1");
    ctx.display_name = "P3";
    auto text = render_prompt(t, prompt_values(ctx, {}, summary, {}));
    CHECK(text.find("P3") != std::string::npos);
    CHECK(text.find("INTJ") != std::string::npos);
    CHECK(text.find("Architect") != std::string::npos);
    CHECK(text.find("{starting_money}") == std::string::npos);
    CHECK(text.find("{") != std::string::npos);  // literal JSON examples survive
    // every placeholder was substituted
    for (auto& name : t.placeholders) CHECK_MESSAGE(text.find("{" + name + "}") == std::string::npos, name);
}

TEST_CASE("each action type appears once in the action space section") {
    auto t = shape_factory_prompt();
    const PromptTemplate::Section* actions = nullptr;
    for (auto& s : t.sections)
        if (s.name == "VALID ACTION SPACES") actions = &s;
    REQUIRE(actions);
    for (auto type : {"message", "propose_trade_offer", "cancel_trade_offer", "trade_response", "produce_shape",
                      "fulfill_order"}) {
        const std::string needle = std::string("- ") + type + ":";
        auto first = actions->text.find(needle);
        CHECK_MESSAGE(first != std::string::npos, type);
        CHECK_MESSAGE(actions->text.find(needle, first + 1) == std::string::npos, type);
    }
}

TEST_CASE("a persona without an MBTI type cannot be rendered") {
    auto [ctx, summary] = seat("A1");
    ctx.persona_profile = "likes round numbers";
    CHECK(persona_fields(ctx.persona_profile).at("personality_description") == "likes round numbers");
    CHECK_THROWS_AS(render_prompt(shape_factory_prompt(), prompt_values(ctx, {}, summary, {})), Error);
}

TEST_CASE("an unknown placeholder fails before anything is rendered") {
    auto t = PromptTemplate::parse("hello {participant_code}\n<EXTRA>\nvalue {unknown_field}\n");
    auto [ctx, summary] = seat("A1");
    try {
        render_prompt(t, prompt_values(ctx, {}, summary, {}));
        FAIL("expected MissingPlaceholder");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingPlaceholder);
        CHECK(e.detail() == "unknown_field");
    }
    auto round = PromptTemplate::parse(shape_factory_prompt().text());
    CHECK(round.text() == shape_factory_prompt().text());
}

TEST_CASE("validation feedback and style reach the prompt") {
    auto [ctx, summary] = seat("A1");
    controls::InteractionControls c;
    c.agent_responsiveness.explanations = controls::Explanations::Proactive;
    acp::ValidationError e{ErrorCode::SchemaViolation, 0, "offer_type", "must be one of buy|sell"};
    auto v = prompt_values(ctx, c, summary, {e});
    CHECK(v["validation_feedback"].find("must be one of buy|sell") != std::string::npos);
    CHECK(v["style_instructions"].find("why") != std::string::npos);
    CHECK(v["participants_list"].find("H1") != std::string::npos);
    CHECK(prompt_values(ctx, c, summary, {})["validation_feedback"].empty());
}

TEST_CASE("healthy endpoint: request shape, bearer key and returned content") {
    StubEndpoint stub([](const httplib::Request&, httplib::Response& res) {
        res.set_content(completion(R"({"planning": "wait", "actions": []})").dump(), "application/json");
    });
    ::setenv("AGORA_TEST_LLM_KEY", kSecret.c_str(), 1);
    std::vector<Incident> incidents;
    LlmStepper llm(stub.config(), shape_factory_prompt(), {}, [&](const Incident& i) { incidents.push_back(i); });
    auto [ctx, summary] = seat("A1");
    auto out = llm.step(ctx, summary, {}, Duration{5000});
    CHECK(out == R"({"planning": "wait", "actions": []})");
    CHECK(stub.hits == 1);
    CHECK(stub.last_auth == "Bearer " + kSecret);
    auto body = json::parse(stub.last_body);
    CHECK(body["model"] == "gpt-4o");
    CHECK(body["messages"][0]["role"] == "user");
    CHECK(body["messages"][0]["content"].get<std::string>().find(kSecret) == std::string::npos);
    CHECK(incidents.empty());
    ::unsetenv("AGORA_TEST_LLM_KEY");
}

TEST_CASE("failing endpoint degrades to a wait after bounded retries") {
    StubEndpoint stub([](const httplib::Request&, httplib::Response& res) {
        res.status = 503;
        res.set_content("overloaded", "text/plain");
    });
    ::setenv("AGORA_TEST_LLM_KEY", kSecret.c_str(), 1);
    std::vector<Incident> incidents;
    LlmStepper llm(stub.config(), shape_factory_prompt(), {}, [&](const Incident& i) { incidents.push_back(i); });
    auto [ctx, summary] = seat("A1");
    auto out = llm.step(ctx, summary, {}, Duration{10000});
    CHECK(stub.hits == 3);
    REQUIRE(incidents.size() == 1);
    CHECK(incidents[0].code == ErrorCode::EndpointUnavailable);
    CHECK(incidents[0].attempts == 3);
    CHECK(incidents[0].participant_id == "A1");
    CHECK(incidents[0].detail.find(kSecret) == std::string::npos);
    auto v = acp::validate_agent_response(out, ctx, summary.pending_offers);
    REQUIRE(std::holds_alternative<acp::AgentResponse>(v));
    CHECK(std::get<acp::AgentResponse>(v).actions.empty());
    ::unsetenv("AGORA_TEST_LLM_KEY");
}

TEST_CASE("rejected credentials are reported at once and not retried") {
    StubEndpoint stub([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    std::vector<Incident> incidents;
    LlmStepper llm(stub.config(), shape_factory_prompt(), {}, [&](const Incident& i) { incidents.push_back(i); });
    auto [ctx, summary] = seat("A1");
    llm.step(ctx, summary, {}, Duration{5000});
    CHECK(stub.hits == 1);
    REQUIRE(incidents.size() == 1);
    CHECK(incidents[0].code == ErrorCode::AuthFailure);
}

TEST_CASE("a slow endpoint never outlives the cycle budget") {
    StubEndpoint stub([](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1500));
        res.set_content(completion("{}").dump(), "application/json");
    });
    LlmStepper llm(stub.config(), shape_factory_prompt(), {});
    auto [ctx, summary] = seat("A1");
    const auto t0 = std::chrono::steady_clock::now();
    try {
        llm.step(ctx, summary, {}, Duration{400});
        FAIL("expected AgentTimeout");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AgentTimeout);
    }
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::milliseconds(1400));
}

TEST_CASE("endpoint config round-trips and rejects bad values") {
    CompletionEndpointConfig c;
    c.model = "local-model";
    c.max_attempts = 5;
    auto back = endpoint_from_json(endpoint_to_json(c));
    CHECK(back.model == "local-model");
    CHECK(back.max_attempts == 5);
    CHECK(!endpoint_to_json(c).dump().empty());
    CHECK_THROWS_AS(endpoint_from_json({{"max_attempts", 0}}), Error);
    c.base_url = "ftp://nowhere";
    CHECK_THROWS_AS(LlmStepper(c, shape_factory_prompt(), {}), Error);
}

TEST_CASE("scripted agent accepts a pending offer by its real id and is deterministic") {
    // A1 holds no triangle and its orders may need one: give it a received sell offer
    auto s = testkit::acp_corpus_session();
    auto ctx = acp::build_agent_context(s, "A1");
    acp::SummaryCursor cursor;
    auto summary = acp::compose_state_summary(s, ctx, 0, cursor);
    auto script = shape_factory_script();
    auto a = scripted_agent_step(summary, ctx, script);
    auto b = scripted_agent_step(summary, ctx, script);
    CHECK(a == b);
    auto v = acp::validate_agent_response(a, ctx, summary.pending_offers);
    REQUIRE(std::holds_alternative<acp::AgentResponse>(v));
    bool responded = false;
    for (auto& act : std::get<acp::AgentResponse>(v).actions)
        if (act.type == "trade_response") {
            CHECK(act.fields["transaction_id"] == "S123-001");
            responded = true;
        }
    CHECK(responded);

    AgentScript empty;
    CHECK(json::parse(scripted_agent_step(summary, ctx, empty))["actions"].empty());
}

TEST_CASE("scripted steps fire in order") {
    AgentScript script;
    script.add({"late", [](const acp::StateSummary& s, const acp::AgentContext&) { return s.timestamp_ms > 1000; },
                [](const acp::StateSummary&, const acp::AgentContext&) {
                    return json{{"planning", "late"}, {"actions", json::array()}};
                }});
    script.add({"always", {}, [](const acp::StateSummary&, const acp::AgentContext&) {
                    return json{{"planning", "early"}, {"actions", json::array()}};
                }});
    auto [ctx, summary] = seat("A1");
    CHECK(script.respond(summary, ctx)["planning"] == "early");
    summary.timestamp_ms = 2000;
    CHECK(script.respond(summary, ctx)["planning"] == "late");
}

TEST_CASE("LLM and scripted adapters are interchangeable behind the loop") {
    // The stub answers with exactly what the script would have said.
    auto script = shape_factory_script();
    StubEndpoint stub([&](const httplib::Request& req, httplib::Response& res) {
        (void)req;
        res.set_content(completion(R"({"planning": "p", "actions": [{"type": "produce_shape", "shape": "circle", "quantity": 1}]})").dump(),
                        "application/json");
    });
    auto run = [&](acp::AgentStepper& stepper) {
        auto initial = testkit::live(testkit::shape_factory_session());
        engine::Session session(initial, nullptr, [] { return std::int64_t{0}; });
        auto ctx = acp::build_agent_context(initial, "A1");
        ctx.persona_profile = kPersona;
        acp::AgentLoop loop(ctx, stepper, session);
        auto out = loop.run_cycle(0);
        for (auto& a : out.scheduled) loop.deliver(a);
        return std::make_pair(out.status, engine::state_to_json(*session.snapshot()));
    };
    LlmStepper llm(stub.config(), shape_factory_prompt(), {});
    AgentScript fixed;
    fixed.add({"produce", {}, [](const acp::StateSummary&, const acp::AgentContext&) {
                   return json{{"planning", "p"},
                               {"actions", {{{"type", "produce_shape"}, {"shape", "circle"}, {"quantity", 1}}}}};
               }});
    ScriptedStepper scripted(fixed);
    auto [ls, lstate] = run(llm);
    auto [ss, sstate] = run(scripted);
    CHECK(ls == acp::CycleStatus::Acted);
    CHECK(ss == acp::CycleStatus::Acted);
    CHECK(lstate == sstate);
}

TEST_CASE("simulated all-agent session trades, replays and is reproducible") {
    sim::SimulationOptions o;
    o.config = testkit::shape_factory();
    o.roster = sim::agent_roster(6);
    o.seed = 11;
    auto r = sim::simulate(o);
    CHECK(r.final_state.phase == engine::Phase::Ended);
    CHECK(!testkit::conservation_violation(r.final_state));
    std::map<std::string, int> kinds;
    for (auto& e : r.events) ++kinds[e.action.value("type", "")];
    CHECK(kinds["produce_shape"] > 0);
    CHECK(kinds["propose_trade_offer"] > 0);
    CHECK(kinds["trade_response"] > 0);
    CHECK(kinds["fulfill_order"] > 0);
    CHECK(kinds["message"] > 0);
    for (auto& [pid, cycles] : r.cycles) CHECK_MESSAGE(cycles.size() == 40, pid);

    auto replayed = engine::replay(r.header, r.events);
    CHECK(engine::state_to_json(replayed.state) == engine::state_to_json(r.final_state));
    auto again = sim::simulate(o);
    CHECK(engine::state_to_json(again.final_state) == engine::state_to_json(r.final_state));
    CHECK(again.events.size() == r.events.size());

    o.seed = 12;
    CHECK(engine::state_to_json(sim::simulate(o).final_state) != engine::state_to_json(r.final_state));
}

TEST_CASE("simulation under every bundled control set stays conserved") {
    for (auto name : {"control.json", "cs_cl_experimental.json", "cs_al_experimental.json", "summary_dashboard.json",
                      "strict_market.json"}) {
        sim::SimulationOptions o;
        o.config = testkit::shape_factory();
        o.controls = controls::load_controls_file(testkit::asset_path(std::string("controls/") + name));
        o.roster = sim::agent_roster(6);
        auto r = sim::simulate(o);
        CHECK_MESSAGE(r.final_state.phase == engine::Phase::Ended, name);
        CHECK_MESSAGE(!testkit::conservation_violation(r.final_state), name);
        CHECK_MESSAGE(engine::replay(r.header, r.events).applied == r.events.size(), name);
    }
}
