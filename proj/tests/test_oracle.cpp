#include <catch2/catch_amalgamated.hpp>

#include "bcast/baselines.hpp"
#include "bcast/equiset.hpp"
#include "bcast/oracle.hpp"
#include "bcast/prng.hpp"
#include "fixtures.hpp"
#include "oracle_reference.hpp"

using bcast::BroadcastInstance;
using bcast::Rational;

TEST_CASE("verifier reproduces the depicted optimum") {
    auto inst = fixtures::figure1();
    auto result = bcast::verify_schedule(fixtures::figure1_optimal_schedule(), inst, Rational(1));
    REQUIRE(result.ok());
    CHECK(result.trace->flow == Rational(11));
    // The first broadcast of C pauses while A and B run.
    REQUIRE(result.trace->broadcasts.at("C").size() == 2);
    CHECK(result.trace->broadcasts.at("C")[0].begin == Rational(0));
    CHECK(result.trace->broadcasts.at("C")[0].end == Rational::of(9, 2));
    CHECK(result.trace->broadcasts.at("C")[1].begin == Rational::of(9, 2));
    CHECK(bcast::flow_time(*result.trace, inst) == Rational(11));
}

TEST_CASE("verifier flags capacity violations") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(1)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    bcast::RateSchedule s;
    s.speed = Rational(1);
    bcast::RateInterval iv;
    iv.begin = Rational(0);
    iv.end = Rational(1);
    iv.item_rates["I"] = Rational::of(11, 10);
    s.intervals.push_back(iv);
    auto result = bcast::verify_schedule(s, inst, Rational(1));
    REQUIRE(!result.ok());
    CHECK(result.violations.front().find("capacity") != std::string::npos);
}

TEST_CASE("verifier flags unserved requests") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(2)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    bcast::RateSchedule s;
    s.speed = Rational(1);
    bcast::RateInterval iv;
    iv.begin = Rational(0);
    iv.end = Rational(1);
    iv.item_rates["I"] = Rational(1);
    s.intervals.push_back(iv);
    auto result = bcast::verify_schedule(s, inst, Rational(1));
    REQUIRE(!result.ok());
    CHECK(result.violations.front().find("unserved") != std::string::npos);
}

TEST_CASE("verifier round-trips simulator output") {
    auto inst = fixtures::figure1();
    auto trace = bcast::simulate_b_equiset(inst, Rational::of(3, 2));
    auto result = bcast::verify_schedule(trace.schedule, inst, Rational::of(3, 2));
    REQUIRE(result.ok());
    CHECK(result.trace->flow == trace.flow);
    CHECK(result.trace->completions == trace.completions);
    for (const auto& [item, list] : trace.broadcasts) {
        REQUIRE(result.trace->broadcasts.at(item).size() == list.size());
        for (size_t k = 0; k < list.size(); ++k) {
            CHECK(result.trace->broadcasts.at(item)[k].begin == list[k].begin);
            CHECK(result.trace->broadcasts.at(item)[k].end == list[k].end);
        }
    }

    auto baseline = bcast::simulate_ignore_deps(inst, Rational(1), bcast::Baseline::RoundRobin);
    auto check = bcast::verify_schedule(baseline.schedule, inst, Rational(1));
    REQUIRE(check.ok());
    CHECK(check.trace->flow == baseline.flow);
}

TEST_CASE("greedy serves the smallest outstanding set first") {
    auto greedy = bcast::greedy_upper_bound(fixtures::figure1());
    CHECK(greedy.flow == Rational::of(27, 2));
    CHECK(greedy.flow >= Rational(11));

    // Its schedule is feasible at unit speed and reproduces the same flow.
    auto inst = fixtures::figure1();
    auto rates = bcast::to_rate_schedule(greedy.schedule, inst);
    auto result = bcast::verify_schedule(rates, inst, Rational(1));
    REQUIRE(result.ok());
    CHECK(result.trace->flow == greedy.flow);
}

TEST_CASE("greedy equals brute force on a single request") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(1)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    auto greedy = bcast::greedy_upper_bound(inst);
    auto best = bcast::brute_force_bopt(inst, Rational(1), 3);
    CHECK(greedy.flow == Rational(1));
    CHECK(best.flow == Rational(1));
    CHECK(best.schedule.slots[0] == 0);
}

TEST_CASE("two distinct singletons cost three in sequence") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(1)}, {"Y", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational(0), {"Y"}}};
    auto best = bcast::brute_force_bopt(inst, Rational(1), 4);
    CHECK(best.flow == Rational(3));
}

TEST_CASE("oracle requires aligned instances and reachable horizons") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational::of(3, 2)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    CHECK_THROWS_AS(bcast::brute_force_bopt(inst, Rational(1), 4), bcast::ValidationError);
    CHECK_THROWS_AS(bcast::brute_force_bopt(inst, Rational::of(1, 2), 2), bcast::Infeasible);
    CHECK_THROWS_AS(bcast::brute_force_bopt(inst, Rational::of(1, 2), 8, 2), bcast::ScaleExceeded);
}

TEST_CASE("branch and bound agrees with plain enumeration") {
    bcast::SplitMix64 rng(911);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        BroadcastInstance inst;
        int n = 1 + static_cast<int>(rng.below(3));
        int q = 1 + static_cast<int>(rng.below(3));
        for (int i = 0; i < n; ++i) {
            inst.items.push_back({"I" + std::to_string(i),
                                  Rational(1 + static_cast<long long>(rng.below(2)))});
        }
        for (int r = 0; r < q; ++r) {
            bcast::Request req;
            req.id = "R" + std::to_string(r);
            req.arrival = Rational(static_cast<long long>(rng.below(3)));
            for (int i = 0; i < n; ++i) {
                if (rng.below(2) == 0) req.items.push_back("I" + std::to_string(i));
            }
            if (req.items.empty()) req.items.push_back("I" + std::to_string(rng.below(n)));
            inst.requests.push_back(std::move(req));
        }
        const int horizon = 6;
        auto expected = reference::enumerate_bopt(inst, Rational(1), horizon);
        if (!expected) {
            CHECK_THROWS_AS(bcast::brute_force_bopt(inst, Rational(1), horizon), bcast::Infeasible);
            continue;
        }
        auto got = bcast::brute_force_bopt(inst, Rational(1), horizon);
        INFO("trial " << trial);
        CHECK(got.flow == *expected);
        ++compared;
    }
    CHECK(compared > 20);
}

TEST_CASE("figure 1 oracle value", "[slow]") {
    auto best = bcast::brute_force_bopt(fixtures::figure1(), Rational::of(1, 2), 14);
    CHECK(best.flow == Rational(11));

    auto inst = fixtures::figure1();
    auto rates = bcast::to_rate_schedule(best.schedule, inst);
    auto result = bcast::verify_schedule(rates, inst, Rational(1));
    REQUIRE(result.ok());
    CHECK(result.trace->flow == Rational(11));
}
