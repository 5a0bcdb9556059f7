#include <doctest.h>

#include <algorithm>
#include <thread>

#include "agora/engine/engine.hpp"
#include "agora/engine/replay.hpp"
#include "agora/engine/session.hpp"
#include "engine_fixtures.hpp"

using namespace agora;
using namespace agora::engine;
using testkit::act;

namespace {

Commit committed(ActionResult r) {
    if (auto* d = std::get_if<Denial>(&r)) FAIL("unexpected denial: " << to_string(d->code) << " " << d->message);
    return std::get<Commit>(r);
}

Denial denied(ActionResult r) {
    REQUIRE_MESSAGE(std::holds_alternative<Denial>(r), "expected a denial");
    return std::get<Denial>(r);
}

std::string dump(const SessionState& s) { return state_to_json(s).dump(); }

/// Live six-seat Shape Factory session where A1 holds one `shape` (from a completed job).
SessionState with_shape(SessionState s, const std::string& pid, const std::string& shape, std::int64_t& now) {
    s = committed(act(s, pid, "produce_shape", {{"shape", shape}, {"quantity", 1}}, now)).state;
    now = s.jobs.back().completes_at;
    return tick(s, now).state;
}

}  // namespace

TEST_CASE("instantiate gives every seat the starting state") {
    auto s = testkit::shape_factory_session();
    REQUIRE(s.participants.size() == 6);
    CHECK(s.phase == Phase::Created);
    int humans = 0;
    for (auto& p : s.participants) {
        CHECK(p.wealth == Money{30000});
        CHECK(p.inventory.empty());
        CHECK(p.orders.size() == 4);
        for (auto& o : p.orders) CHECK(o.shape != p.specialty_shape);
        humans += p.kind == ParticipantKind::Human;
    }
    CHECK(humans == 1);
    // round-robin specialties over circle, square, triangle
    CHECK(s.participants[0].specialty_shape == "circle");
    CHECK(s.participants[1].specialty_shape == "square");
    CHECK(s.participants[2].specialty_shape == "triangle");
    CHECK(s.participants[3].specialty_shape == "circle");
}

TEST_CASE("roster problems are rejected") {
    auto cfg = testkit::shape_factory();
    auto code = [&](std::vector<RosterEntry> r, controls::InteractionControls c = {}) {
        try {
            instantiate_session(cfg, c, r, "1", 1);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::UnknownSession;
    };
    CHECK(code({}) == ErrorCode::RosterMismatch);
    CHECK(code(testkit::roster(5)) == ErrorCode::RosterMismatch);
    auto dup = testkit::roster(6);
    dup[3].participant_id = dup[2].participant_id;
    CHECK(code(dup) == ErrorCode::DuplicateRoster);
    controls::InteractionControls bad;
    bad.action_structure.price_limits = controls::PriceLimits{Money{0}, Money{100000}};
    CHECK(code(testkit::roster(6), bad) == ErrorCode::InvalidControls);
    controls::InteractionControls human_named;
    human_named.social_framing.agent_display_names = {{"H1", "Robin"}};
    CHECK(code(testkit::roster(6), human_named) == ErrorCode::InvalidControls);
    controls::InteractionControls clash;
    clash.social_framing.agent_display_names = {{"A1", "H1"}};
    CHECK(code(testkit::roster(6), clash) == ErrorCode::InvalidControls);
}

TEST_CASE("generated orders never contain the participant's specialty") {
    int lines = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto s = testkit::shape_factory_session({}, seed);
        for (auto& p : s.participants)
            for (auto& o : p.orders) {
                CHECK(o.shape != p.specialty_shape);
                ++lines;
            }
    }
    CHECK(lines == 100 * 6 * 4);
    // the draw depends on the seed
    CHECK(dump(testkit::shape_factory_session({}, 1)) != dump(testkit::shape_factory_session({}, 2)));
    CHECK(dump(testkit::shape_factory_session({}, 1)) == dump(testkit::shape_factory_session({}, 1)));
}

TEST_CASE("actions before start and after end are denied") {
    auto s = testkit::shape_factory_session();
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 0)).code == ErrorCode::WrongPhase);
    s = testkit::live(s);
    CHECK_THROWS_AS(start_session(s, 5), Error);
    CHECK(denied(act(s, "nobody", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 0)).code ==
          ErrorCode::UnknownActor);
    CHECK(denied(act(s, "H1", "dance", json::object(), 0)).code == ErrorCode::UnknownAction);
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 600000)).code ==
          ErrorCode::SessionEnded);
    auto ended = end_session(s, 10).state;
    CHECK(ended.phase == Phase::Ended);
    CHECK(denied(act(ended, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 20)).code ==
          ErrorCode::SessionEnded);
}

TEST_CASE("clock never goes backwards") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 5000)).state;
    CHECK_THROWS_AS(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 4999), Error);
    CHECK_THROWS_AS(tick(s, 100), Error);
}

TEST_CASE("producing the specialty charges the specialty cost and queues one job") {
    auto s = testkit::live(testkit::shape_factory_session());
    auto c = committed(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 1000));
    CHECK(c.state.find("H1")->wealth == Money{30000 - 1000});
    REQUIRE(c.state.jobs.size() == 1);
    CHECK(c.state.jobs[0].started_at == 1000);
    CHECK(c.state.jobs[0].completes_at == 31000);
    CHECK(c.state.in_production("H1") == 1);
    CHECK(c.event.actor == "H1");
    CHECK(c.event.delta["participants"]["H1"]["wealth_cents"] == 29000);

    auto regular = committed(act(s, "H1", "produce_shape", {{"shape", "square"}, {"quantity", 2}}, 1000)).state;
    CHECK(regular.find("H1")->wealth == Money{30000 - 8000});
    REQUIRE(regular.jobs.size() == 2);
    CHECK(regular.jobs[1].started_at == regular.jobs[0].completes_at);  // one production line per participant
}

TEST_CASE("job completing at t is in inventory after a tick at t") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 0)).state;
    CHECK(tick(s, 29999).events.empty());
    auto t = tick(s, 30000);
    REQUIRE(t.events.size() == 1);
    CHECK(t.events[0].action["type"] == "production_completed");
    CHECK(t.events[0].cause == "tick");
    CHECK(t.state.find("H1")->held("circle") == 1);
    CHECK(t.state.in_production("H1") == 0);
}

TEST_CASE("the max production limit denies the ninth shape") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 8}}, 0)).state;
    auto d = denied(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 1));
    CHECK(d.code == ErrorCode::PolicyDenied);
    CHECK(d.policy == "max_production");
    CHECK(d.message == "max production limit");
    auto big = denied(act(testkit::live(testkit::shape_factory_session()), "H1", "produce_shape",
                           {{"shape", "circle"}, {"quantity", 9}}, 0));
    CHECK(big.message == "max production limit");
}

TEST_CASE("produce with malformed arguments") {
    auto s = testkit::live(testkit::shape_factory_session());
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "hexagon"}, {"quantity", 1}}, 0)).code == ErrorCode::UnknownShape);
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 0}}, 0)).code == ErrorCode::BadQuantity);
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", "2"}}, 0)).code == ErrorCode::BadQuantity);
    // 8 regular shapes cost $320 > $300
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "square"}, {"quantity", 8}}, 0)).code ==
          ErrorCode::InsufficientFunds);
}

TEST_CASE("first offer of session 123 is S123-001") {
    auto s = testkit::live(testkit::shape_factory_session());
    json offer = {{"target", "A1"}, {"offer_type", "buy"}, {"shape", "square"}, {"price_cents", 2500}};
    auto c = committed(act(s, "H1", "propose_trade_offer", offer, 0));
    REQUIRE(c.state.offers.size() == 1);
    CHECK(c.state.offers[0].transaction_id == "S123-001");
    CHECK(c.state.offers[0].status == OfferStatus::Pending);
    auto c2 = committed(act(c.state, "H1", "propose_trade_offer", offer, 1));
    CHECK(c2.state.offers[1].transaction_id == "S123-002");
    CHECK(transaction_id("9", 1234) == "S9-1234");
}

TEST_CASE("offer validation") {
    auto s = testkit::live(testkit::shape_factory_session());
    auto propose = [&](json o) { return act(s, "H1", "propose_trade_offer", o, 0); };
    json base = {{"target", "A1"}, {"offer_type", "sell"}, {"shape", "circle"}, {"price_cents", 2500}};
    auto with = [&](const char* k, json v) {
        json o = base;
        o[k] = v;
        return o;
    };
    CHECK(denied(propose(with("price_cents", 10001))).code == ErrorCode::PriceOutOfRange);
    CHECK(denied(propose(with("price_cents", 499))).code == ErrorCode::PriceOutOfRange);
    committed(propose(with("price_cents", 10000)));
    committed(propose(with("price_cents", 500)));
    CHECK(denied(propose(with("target", "H1"))).code == ErrorCode::SelfTrade);
    CHECK(denied(propose(with("target", "Z9"))).code == ErrorCode::UnknownParticipant);
    CHECK(denied(propose(with("offer_type", "lend"))).code == ErrorCode::SchemaViolation);
    CHECK(denied(propose(with("shape", "hexagon"))).code == ErrorCode::UnknownShape);
}

TEST_CASE("strict escrow checks sell offers at proposal") {
    controls::InteractionControls c;
    c.action_structure.escrow = controls::Escrow::Strict;
    auto s = testkit::live(testkit::shape_factory_session(c));
    json sell = {{"target", "A1"}, {"offer_type", "sell"}, {"shape", "circle"}, {"price_cents", 2500}};
    auto d = denied(act(s, "H1", "propose_trade_offer", sell, 0));
    CHECK(d.code == ErrorCode::ShapeNotHeld);
    CHECK(d.message == "shape not held");
    std::int64_t now = 0;
    s = with_shape(s, "H1", "circle", now);
    committed(act(s, "H1", "propose_trade_offer", sell, now));
    // default escrow accepts the proposal and checks at acceptance
    auto loose = testkit::live(testkit::shape_factory_session());
    committed(act(loose, "H1", "propose_trade_offer", sell, 0));
}

TEST_CASE("accepting an offer moves money and the shape, conserving both") {
    std::int64_t now = 0;
    auto s = with_shape(testkit::live(testkit::shape_factory_session()), "A2", "square", now);
    // A2 sells a square to H1 for $25
    s = committed(act(s, "A2", "propose_trade_offer",
                      {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "square"}, {"price_cents", 2500}}, now))
            .state;
    const auto before = total_wealth(s);
    const auto h1 = s.find("H1")->wealth, a2 = s.find("A2")->wealth;
    auto c = committed(act(s, "H1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "accept"}}, now));
    CHECK(c.state.find("H1")->wealth.cents == h1.cents - 2500);
    CHECK(c.state.find("A2")->wealth.cents == a2.cents + 2500);
    CHECK(c.state.find("H1")->held("square") == 1);
    CHECK(c.state.find("A2")->held("square") == 0);
    CHECK(total_wealth(c.state) == before);
    CHECK(total_shapes(c.state) == total_shapes(s));
    CHECK(c.state.offers[0].status == OfferStatus::Accepted);

    auto again = denied(act(c.state, "H1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "accept"}}, now));
    CHECK(again.code == ErrorCode::AlreadyResolved);
    CHECK(denied(act(s, "A1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "accept"}}, now)).code ==
          ErrorCode::NotAddressee);
    CHECK(denied(act(s, "H1", "trade_response", {{"transaction_id", "transaction_id"}, {"response_type", "accept"}}, now))
              .code == ErrorCode::UnknownTransaction);

    auto declined = committed(act(s, "H1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "decline"}}, now));
    CHECK(declined.state.offers[0].status == OfferStatus::Declined);
    CHECK(total_wealth(declined.state) == before);
}

TEST_CASE("a buyer who cannot pay leaves the state unchanged") {
    std::int64_t now = 0;
    auto s = with_shape(testkit::live(testkit::shape_factory_session()), "A2", "square", now);
    s = committed(act(s, "A2", "propose_trade_offer",
                      {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "square"}, {"price_cents", 9000}}, now))
            .state;
    // H1 spends down to $30 on production
    s = committed(act(s, "H1", "produce_shape", {{"shape", "square"}, {"quantity", 6}}, now)).state;
    CHECK(s.find("H1")->wealth == Money{6000});
    s = committed(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 2}}, now)).state;
    CHECK(s.find("H1")->wealth == Money{4000});
    const auto before = dump(s);
    auto d = denied(act(s, "H1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "accept"}}, now));
    CHECK(d.code == ErrorCode::InsufficientFunds);
    CHECK(dump(s) == before);
}

TEST_CASE("seller without the shape cannot settle") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "H1", "propose_trade_offer",
                      {{"target", "A1"}, {"offer_type", "sell"}, {"shape", "triangle"}, {"price_cents", 2000}}, 0))
            .state;
    CHECK(denied(act(s, "A1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "accept"}}, 0)).code ==
          ErrorCode::ShapeNotHeld);
}

TEST_CASE("cancelling offers") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "H1", "propose_trade_offer",
                      {{"target", "A1"}, {"offer_type", "buy"}, {"shape", "square"}, {"price_cents", 2000}}, 0))
            .state;
    CHECK(denied(act(s, "A1", "cancel_trade_offer", {{"transaction_id", "S123-001"}}, 0)).code == ErrorCode::NotOwner);
    CHECK(denied(act(s, "H1", "cancel_trade_offer", {{"transaction_id", "S123-404"}}, 0)).code ==
          ErrorCode::UnknownTransaction);
    auto c = committed(act(s, "H1", "cancel_trade_offer", {{"transaction_id", "S123-001"}}, 0)).state;
    CHECK(c.offers[0].status == OfferStatus::Cancelled);
    CHECK(denied(act(c, "H1", "cancel_trade_offer", {{"transaction_id", "S123-001"}}, 0)).code == ErrorCode::AlreadyResolved);
}

TEST_CASE("cancel then accept through the commit queue: the accept loses") {
    std::int64_t now = 0;
    auto s = with_shape(testkit::live(testkit::shape_factory_session()), "A1", "circle", now);
    s = committed(act(s, "A1", "propose_trade_offer",
                      {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "circle"}, {"price_cents", 2000}}, now))
            .state;
    Session session(s, nullptr, [now] { return now; });
    auto cancel = session.submit({"A1", "cancel_trade_offer", {{"transaction_id", "S123-001"}}});
    CHECK(cancel.committed());
    auto accept = session.submit({"H1", "trade_response", {{"transaction_id", "S123-001"}, {"response_type", "accept"}}});
    REQUIRE(accept.denial);
    CHECK(accept.denial->code == ErrorCode::AlreadyResolved);
}

TEST_CASE("concurrent responses to one offer: exactly one wins") {
    std::int64_t now = 0;
    auto s = with_shape(testkit::live(testkit::shape_factory_session()), "A1", "circle", now);
    s = committed(act(s, "A1", "propose_trade_offer",
                      {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "circle"}, {"price_cents", 2000}}, now))
            .state;
    Session session(s, nullptr, [now] { return now; });
    std::atomic<int> wins{0}, resolved{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i)
        threads.emplace_back([&, i] {
            ActionRequest r = i % 2 ? ActionRequest{"A1", "cancel_trade_offer", {{"transaction_id", "S123-001"}}}
                                    : ActionRequest{"H1", "trade_response",
                                                    {{"transaction_id", "S123-001"}, {"response_type", "accept"}}};
            auto res = session.submit(r);
            if (res.committed()) ++wins;
            else if (res.denial->code == ErrorCode::AlreadyResolved) ++resolved;
        });
    for (auto& t : threads) t.join();
    CHECK(wins == 1);
    CHECK(resolved == 7);
}

TEST_CASE("fulfilling orders") {
    std::int64_t now = 0;
    auto s = testkit::live(testkit::shape_factory_session());
    const auto& h1 = *s.find("H1");
    const auto need = h1.orders[0].shape;
    s = with_shape(s, "H1", need, now);
    const auto w = s.find("H1")->wealth;
    auto c = committed(act(s, "H1", "fulfill_order", {{"order_indices", {0}}}, now));
    CHECK(c.state.find("H1")->wealth.cents == w.cents + 6000);
    CHECK(c.state.find("H1")->held(need) == 0);
    CHECK(c.state.find("H1")->orders[0].fulfilled);
    CHECK(c.state.find("H1")->orders_fulfilled == 1);
    CHECK(denied(act(c.state, "H1", "fulfill_order", {{"order_indices", {0}}}, now)).code == ErrorCode::AlreadyFulfilled);
    CHECK(denied(act(c.state, "H1", "fulfill_order", {{"order_indices", {4}}}, now)).code == ErrorCode::BadIndex);
    CHECK(denied(act(c.state, "H1", "fulfill_order", {{"order_indices", {-1}}}, now)).code == ErrorCode::BadIndex);

    auto empty = committed(act(s, "H1", "fulfill_order", {{"order_indices", json::array()}}, now));
    CHECK(empty.state.find("H1")->wealth == w);
    CHECK(empty.event.seq == s.next_seq);
}

TEST_CASE("fulfilling two lines of the same shape needs two shapes") {
    // find a seed where H1 has two order lines of one shape
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto s = testkit::live(testkit::shape_factory_session({}, seed));
        const auto& orders = s.find("H1")->orders;
        std::optional<std::pair<int, int>> pair;
        for (int i = 0; i < 4 && !pair; ++i)
            for (int j = i + 1; j < 4 && !pair; ++j)
                if (orders[i].shape == orders[j].shape) pair = {i, j};
        if (!pair) continue;
        std::int64_t now = 0;
        s = with_shape(s, "H1", orders[pair->first].shape, now);
        const auto before = dump(s);
        auto d = denied(act(s, "H1", "fulfill_order", {{"order_indices", {pair->first, pair->second}}}, now));
        CHECK(d.code == ErrorCode::MissingShape);
        CHECK(dump(s) == before);
        committed(act(s, "H1", "fulfill_order", {{"order_indices", {pair->first}}}, now));
        return;
    }
    FAIL("no seed produced a repeated order shape");
}

TEST_CASE("three jobs completing between two ticks arrive in completion order") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "A1", "produce_shape", {{"shape", "square"}, {"quantity", 1}}, 2000)).state;  // 32000
    s = committed(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 5000)).state;  // 35000
    s = committed(act(s, "A2", "produce_shape", {{"shape", "triangle"}, {"quantity", 1}}, 5000)).state;  // 35000
    s = tick(s, 10000).state;
    auto t = tick(s, 40000);
    REQUIRE(t.events.size() == 3);
    CHECK(t.events[0].action["owner"] == "A1");
    CHECK(t.events[1].action["owner"] == "H1");  // tie at 35000 broken by job id
    CHECK(t.events[2].action["owner"] == "A2");
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(t.events[i].ts == 40000);
        CHECK(t.events[i].seq == s.next_seq + static_cast<std::int64_t>(i));
    }
}

TEST_CASE("ticking past the end expires pending offers and ends the session") {
    auto s = testkit::live(testkit::shape_factory_session());
    s = committed(act(s, "H1", "propose_trade_offer",
                      {{"target", "A1"}, {"offer_type", "buy"}, {"shape", "square"}, {"price_cents", 2000}}, 0))
            .state;
    s = committed(act(s, "A2", "propose_trade_offer",
                      {{"target", "A3"}, {"offer_type", "buy"}, {"shape", "circle"}, {"price_cents", 2000}}, 0))
            .state;
    s = committed(act(s, "A3", "produce_shape", {{"shape", "circle"}, {"quantity", 8}}, 100000)).state;
    auto t = tick(s, 700000);
    REQUIRE(t.events.size() >= 3);
    auto n = t.events.size();
    CHECK(t.events[n - 3].action["type"] == "offer_expired");
    CHECK(t.events[n - 2].action["type"] == "offer_expired");
    CHECK(t.events[n - 1].action["type"] == "session_ended");
    CHECK(t.state.phase == Phase::Ended);
    CHECK(t.state.jobs.empty());
    for (auto& o : t.state.offers) CHECK(o.status == OfferStatus::Expired);
    // jobs due after the end never complete
    for (auto& e : t.events)
        if (e.action["type"] == "production_completed") CHECK(e.action["completes_at"].get<std::int64_t>() <= 600000);
    CHECK(tick(t.state, 800000).events.empty());
}

TEST_CASE("gate_trade: concurrency, counteroffers and rate limits") {
    json offer = {{"target", "A1"}, {"offer_type", "buy"}, {"shape", "square"}, {"price_cents", 2000}};
    SUBCASE("one offer at a time") {
        controls::InteractionControls c;
        c.action_structure.concurrent_offers_allowed = false;
        auto s = testkit::live(testkit::shape_factory_session(c));
        s = committed(act(s, "H1", "propose_trade_offer", offer, 0)).state;
        CHECK(denied(act(s, "H1", "propose_trade_offer", offer, 1)).code == ErrorCode::ConcurrencyDenied);
        s = committed(act(s, "H1", "cancel_trade_offer", {{"transaction_id", "S123-001"}}, 1)).state;
        committed(act(s, "H1", "propose_trade_offer", offer, 2));
    }
    SUBCASE("accept or reject forbids counteroffers") {
        controls::InteractionControls c;
        c.action_structure.negotiation = controls::Negotiation::AcceptOrReject;
        auto s = testkit::live(testkit::shape_factory_session(c));
        s = committed(act(s, "H1", "propose_trade_offer", offer, 0)).state;
        json counter = {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "square"}, {"price_cents", 3000}};
        CHECK(denied(act(s, "A1", "propose_trade_offer", counter, 1)).code == ErrorCode::CounterofferDisallowed);
        counter["counter_to"] = "S123-001";
        CHECK(denied(act(s, "A1", "propose_trade_offer", counter, 1)).code == ErrorCode::CounterofferDisallowed);
        // an unrelated offer is fine
        committed(act(s, "A1", "propose_trade_offer",
                      {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "triangle"}, {"price_cents", 3000}}, 1));
    }
    SUBCASE("open negotiation links counteroffers") {
        auto s = testkit::live(testkit::shape_factory_session());
        s = committed(act(s, "H1", "propose_trade_offer", offer, 0)).state;
        auto c = committed(act(s, "A1", "propose_trade_offer",
                               {{"target", "H1"}, {"offer_type", "sell"}, {"shape", "square"}, {"price_cents", 3000}}, 1))
                     .state;
        CHECK(c.offers[1].counter_to == std::optional<std::string>("S123-001"));
    }
    SUBCASE("sliding-window rate limit") {
        controls::InteractionControls c;
        c.action_structure.max_trade_frequency = controls::RateLimit{2, Duration{60000}};
        auto s = testkit::live(testkit::shape_factory_session(c));
        s = committed(act(s, "H1", "propose_trade_offer", offer, 0)).state;
        s = committed(act(s, "H1", "propose_trade_offer", offer, 30000)).state;
        CHECK(denied(act(s, "H1", "propose_trade_offer", offer, 59999)).code == ErrorCode::RateLimited);
        // the first offer leaves the window at 60000
        committed(act(s, "H1", "propose_trade_offer", offer, 60000));
        // other participants have their own window
        committed(act(s, "A2", "propose_trade_offer", offer, 59999));
    }
    SUBCASE("price limit override narrows the paradigm range") {
        controls::InteractionControls c;
        c.action_structure.price_limits = controls::PriceLimits{Money{1000}, Money{5000}};
        auto s = testkit::live(testkit::shape_factory_session(c));
        json o = offer;
        o["price_cents"] = 5100;
        CHECK(denied(act(s, "H1", "propose_trade_offer", o, 0)).code == ErrorCode::PriceOutOfRange);
    }
}

TEST_CASE("route_message under each chat mode") {
    auto msg = [](json to, std::string body = "hello") { return json{{"recipients", to}, {"body", body}}; };
    SUBCASE("disabled") {
        controls::InteractionControls c;
        c.information_flow.chat_mode = controls::ChatMode::Disabled;
        auto s = testkit::live(testkit::shape_factory_session(c));
        CHECK(denied(act(s, "H1", "message", msg({"A1"}), 0)).code == ErrorCode::ChatDisabled);
        CHECK(denied(act(s, "A1", "message", msg(json::array()), 0)).code == ErrorCode::ChatDisabled);
    }
    SUBCASE("private") {
        auto s = testkit::live(testkit::shape_factory_session());
        CHECK(denied(act(s, "H1", "message", msg({"A1", "A2"}), 0)).code == ErrorCode::PrivateOnly);
        CHECK(denied(act(s, "H1", "message", msg(json::array()), 0)).code == ErrorCode::PrivateOnly);
        CHECK(denied(act(s, "H1", "message", msg({"Q7"}), 0)).code == ErrorCode::UnknownRecipient);
        auto c = committed(act(s, "H1", "message", msg({"A1"}), 0));
        REQUIRE(c.state.messages.size() == 1);
        CHECK(c.state.messages[0].recipients == std::vector<std::string>{"A1"});
        CHECK(c.event.delta["messages"][0]["recipients"] == json({"A1"}));
    }
    SUBCASE("group") {
        controls::InteractionControls c;
        c.information_flow.chat_mode = controls::ChatMode::Group;
        auto r = testkit::roster(6);
        r[5].group = "other";
        auto s = testkit::live(instantiate_session(testkit::shape_factory(), c, r, "5", 1));
        auto commit = committed(act(s, "H1", "message", msg(json::array()), 0));
        CHECK(commit.state.messages[0].recipients.size() == 4);
        CHECK(commit.state.messages[0].channel == ChatChannel::Group);
    }
    SUBCASE("length limit counts characters") {
        controls::InteractionControls c;
        c.information_flow.max_message_length = 5;
        auto s = testkit::live(testkit::shape_factory_session(c));
        committed(act(s, "H1", "message", msg({"A1"}, "h\xC3\xA9llo"), 0));  // 5 characters, 6 bytes
        CHECK(denied(act(s, "H1", "message", msg({"A1"}, "hello!"), 0)).code == ErrorCode::TooLong);
    }
    SUBCASE("turn taking") {
        controls::InteractionControls c;
        c.information_flow.turn_taking = true;
        c.information_flow.turn_timeout = Duration{30000};
        auto s = testkit::live(testkit::shape_factory_session(c));
        CHECK(turn_holder(s, 0) == "H1");
        CHECK(denied(act(s, "A1", "message", msg({"H1"}), 0)).code == ErrorCode::NotYourTurn);
        s = committed(act(s, "H1", "message", msg({"A1"}), 1000)).state;
        CHECK(turn_holder(s, 1000) == "A1");
        // A1 stays silent: after the timeout the turn passes to A2
        CHECK(turn_holder(s, 31000) == "A2");
        CHECK(denied(act(s, "A1", "message", msg({"H1"}), 31000)).code == ErrorCode::NotYourTurn);
        committed(act(s, "A2", "message", msg({"H1"}), 31000));
        // wraps around the roster
        CHECK(turn_holder(s, 1000 + 5 * 30000) == "H1");
    }
}

TEST_CASE("replay reproduces the final state and every event") {
    auto s = testkit::live(testkit::shape_factory_session({}, 11));
    auto initial = testkit::shape_factory_session({}, 11);
    auto header = make_header(initial, 0);
    std::vector<CommittedEvent> log = start_session(initial, 0).events;
    SeededStream rng(5);
    std::int64_t now = 0;
    for (int i = 0; i < 400; ++i) {
        now += rng.uniform(0, 3000);
        auto t = tick(s, now);
        log.insert(log.end(), t.events.begin(), t.events.end());
        s = t.state;
        if (s.phase != Phase::Live) break;
        auto r = apply_action(s, testkit::random_request(s, rng), now);
        if (auto* c = std::get_if<Commit>(&r)) {
            log.push_back(c->event);
            s = c->state;
        }
    }
    auto t = tick(s, now + 700000);
    log.insert(log.end(), t.events.begin(), t.events.end());
    s = t.state;
    CHECK(s.phase == Phase::Ended);
    CHECK(log.size() > 50);

    // seq gap-free, timestamps non-decreasing
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(log[i].seq == static_cast<std::int64_t>(i) + 1);
        if (i) CHECK(log[i].ts >= log[i - 1].ts);
    }
    // through JSON, as on disk
    std::vector<CommittedEvent> parsed;
    for (auto& e : log) parsed.push_back(event_from_json(json::parse(event_to_json(e).dump())));
    auto h2 = header_from_json(json::parse(header_to_json(header).dump()));
    auto r = replay(h2, parsed);
    CHECK(r.applied == log.size());
    CHECK(dump(r.state) == dump(s));

    SUBCASE("a tampered event is detected") {
        parsed[5].ts += 1;
        CHECK_THROWS_AS(replay(h2, parsed), Error);
    }
    SUBCASE("a gap is detected") {
        parsed.erase(parsed.begin() + 3);
        CHECK_THROWS_AS(replay(h2, parsed), Error);
    }
    SUBCASE("a truncated final batch is tolerated only on request") {
        parsed.pop_back();  // session_ended from the final tick batch
        CHECK_THROWS_AS(replay(h2, parsed), Error);
        auto partial = replay(h2, parsed, true);
        CHECK(partial.state.phase == Phase::Live);
        CHECK(partial.applied < parsed.size());
    }
}

TEST_CASE("denials are pre-commit and injected faults leave no trace") {
    SeededStream rng(99);
    auto s = testkit::live(testkit::shape_factory_session());
    const char* points[] = {"begin", "mechanics", "costs", "effects", "seal"};
    int denials = 0, faults = 0, commits = 0;
    std::int64_t now = 0;
    for (int i = 0; i < 1500; ++i) {
        now += rng.uniform(0, 1500);
        s = tick(s, now).state;
        if (s.phase != Phase::Live) break;
        auto req = testkit::random_request(s, rng);
        const auto before = dump(s);
        if (rng.uniform(0, 3) == 0) {
            std::string point = points[rng.uniform(0, 4)];
            try {
                apply_action(s, req, now, [&](std::string_view p) {
                    if (p == point) throw std::runtime_error("injected");
                });
            } catch (const std::runtime_error&) {
                ++faults;
            }
            CHECK(dump(s) == before);
            continue;
        }
        auto r = apply_action(s, req, now);
        if (std::holds_alternative<Denial>(r)) {
            ++denials;
            CHECK(dump(s) == before);
            continue;
        }
        ++commits;
        s = std::get<Commit>(r).state;
        auto v = testkit::conservation_violation(s);
        CHECK_MESSAGE(!v, *v);
    }
    CHECK(faults > 50);
    CHECK(denials > 50);
    CHECK(commits > 50);
}

TEST_CASE("paradigm-defined actions apply ECL costs and effects") {
    auto s = testkit::live(instantiate_session(testkit::daytrader(), {}, testkit::roster(4), "77", 3));
    auto c = committed(act(s, "H1", "invest", {{"amount", 1500}}, 0));
    CHECK(c.state.find("H1")->wealth == Money{8500});
    CHECK(c.state.find("H1")->extras.at("contributed") == Value{Money{1500}});
    CHECK(c.state.ledger.costs_paid == Money{1500});
    auto cap = denied(act(c.state, "H1", "invest", {{"amount", 600}}, 0));
    CHECK(cap.policy == "contribution_cap");
    CHECK(denied(act(s, "H1", "invest", {{"amount", 0}}, 0)).policy == "positive_amount");
    CHECK(denied(act(s, "H1", "invest", {{"amount", "ten"}}, 0)).code == ErrorCode::SchemaViolation);
    CHECK(denied(act(s, "H1", "invest", {{"amount", 100}, {"extra", 1}}, 0)).code == ErrorCode::SchemaViolation);
    CHECK(denied(act(s, "H1", "produce_shape", {{"shape", "circle"}, {"quantity", 1}}, 0)).code == ErrorCode::UnknownAction);
    CHECK(!testkit::conservation_violation(c.state));
}

TEST_CASE("information-flow and framing controls never change economics") {
    std::vector<controls::InteractionControls> variants(4);
    variants[1].information_flow.dashboard_enabled = false;
    variants[2].information_flow.granularity = controls::Granularity::Summary;
    variants[3].information_flow.chat_mode = controls::ChatMode::Disabled;
    variants[3].social_framing.agent_display_names = {{"A1", "Sam"}};
    variants[3].social_framing.persona_visible = true;
    std::vector<std::string> wealth;
    for (auto& c : variants) {
        SeededStream rng(1234);
        auto s = testkit::live(testkit::shape_factory_session(c, 3));
        std::int64_t now = 0;
        for (int i = 0; i < 600; ++i) {
            now += 700;
            s = tick(s, now).state;
            auto req = testkit::random_request(s, rng);
            if (req.type == "message") continue;  // routing differs by design; economics must not
            auto r = apply_action(s, req, now);
            if (auto* cm = std::get_if<Commit>(&r)) s = cm->state;
        }
        json w = json::array();
        for (auto& p : s.participants) w.push_back({p.wealth.cents, p.inventory});
        wealth.push_back(w.dump());
    }
    for (auto& w : wealth) CHECK(w == wealth[0]);
}
