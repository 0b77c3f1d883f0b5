#include <catch2/catch_amalgamated.hpp>

#include "bcast/instance.hpp"
#include "bcast/json_io.hpp"
#include "bcast/schedule.hpp"
#include "fixtures.hpp"

using bcast::BroadcastInstance;
using bcast::Rational;

TEST_CASE("figure1 instance validates") {
    auto report = bcast::validate_instance(fixtures::figure1());
    CHECK(report.ok());
}

TEST_CASE("validation flags dangling references") {
    BroadcastInstance inst = fixtures::figure1();
    inst.requests.push_back({"S5", Rational(0), {"Z"}});
    auto report = bcast::validate_instance(inst);
    REQUIRE(!report.ok());
    CHECK(report.issues.front().code == "dangling-reference");
}

TEST_CASE("validation flags empty request sets") {
    BroadcastInstance inst = fixtures::figure1();
    inst.requests.push_back({"S5", Rational(1), {}});
    auto report = bcast::validate_instance(inst);
    REQUIRE(!report.ok());
    CHECK(report.issues.front().code == "empty-set");
}

TEST_CASE("validation flags bad lengths, duplicates and arrivals") {
    BroadcastInstance inst;
    inst.items = {{"A", Rational(0)}, {"A", Rational(1)}};
    inst.requests = {{"R", Rational(-1), {"A", "A"}}, {"R", Rational(0), {"A"}}};
    auto report = bcast::validate_instance(inst);
    std::set<std::string> codes;
    for (const auto& issue : report.issues) codes.insert(issue.code);
    CHECK(codes.count("non-positive-length"));
    CHECK(codes.count("duplicate-id"));
    CHECK(codes.count("negative-arrival"));
    CHECK(codes.count("duplicate-member"));
}

TEST_CASE("trace interval queries") {
    bcast::BroadcastTrace trace;
    trace.broadcasts["A"] = {{Rational(0), Rational(2)}, {Rational(2), Rational::of(31, 6)}};
    trace.horizon = Rational(6);

    auto b = bcast::first_broadcast_after(trace, "A", Rational(1));
    REQUIRE(b);
    CHECK(b->begin == Rational(2));

    b = bcast::first_broadcast_after(trace, "A", Rational(0));
    REQUIRE(b);
    CHECK(b->begin == Rational(0));
    CHECK(b->end == Rational(2));

    // Arriving exactly when a broadcast begins still catches it.
    b = bcast::first_broadcast_after(trace, "A", Rational(2));
    REQUIRE(b);
    CHECK(b->begin == Rational(2));

    CHECK(!bcast::first_broadcast_after(trace, "A", Rational(6)));
    CHECK_THROWS_AS(bcast::first_broadcast_after(trace, "Z", Rational(0)), bcast::ValidationError);
}

TEST_CASE("flow_time recomputes and cross-checks") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(2)}};
    inst.requests = {{"R", Rational(0), {"I"}}};

    bcast::BroadcastTrace trace;
    trace.broadcasts["I"] = {{Rational(0), Rational(1)}};
    trace.completions["R"] = Rational(1);
    trace.flow = Rational(1);
    trace.horizon = Rational(1);
    CHECK(bcast::flow_time(trace, inst) == Rational(1));

    trace.flow = Rational(2);
    CHECK_THROWS_AS(bcast::flow_time(trace, inst), bcast::TraceMismatch);

    trace.flow = Rational(1);
    trace.broadcasts["I"].clear();
    CHECK_THROWS_AS(bcast::flow_time(trace, inst), bcast::UnservedRequest);
}

TEST_CASE("instance json round-trip") {
    BroadcastInstance inst = fixtures::figure1();
    auto j = bcast::instance_to_json(inst);
    BroadcastInstance back = bcast::instance_from_json(j);
    CHECK(bcast::instance_to_json(back) == j);
    CHECK(back.items.size() == 3);
    CHECK(back.items[0].length == Rational::of(3, 2));
    CHECK(back.requests[3].arrival == Rational(3));
}

TEST_CASE("instance json rejects unknown fields and bad rationals") {
    auto j = bcast::instance_to_json(fixtures::figure1());
    j["extra"] = 1;
    CHECK_THROWS_AS(bcast::instance_from_json(j), bcast::ParseError);

    auto k = bcast::instance_to_json(fixtures::figure1());
    k["items"][0]["length"] = "1.5";
    CHECK_THROWS_AS(bcast::instance_from_json(k), bcast::ParseError);

    auto m = bcast::instance_to_json(fixtures::figure1());
    m["items"][0]["note"] = "x";
    CHECK_THROWS_AS(bcast::instance_from_json(m), bcast::ParseError);
}
