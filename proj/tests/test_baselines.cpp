#include <catch2/catch_amalgamated.hpp>

#include "bcast/baselines.hpp"
#include "bcast/equiset.hpp"
#include "fixtures.hpp"

using bcast::Baseline;
using bcast::BroadcastInstance;
using bcast::Rational;

TEST_CASE("identical demands aggregate into one broadcast") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational(0), {"X"}}};
    auto trace = bcast::simulate_ignore_deps(inst, Rational(1), Baseline::EquiPerItem);
    REQUIRE(trace.broadcasts.at("X").size() == 1);
    CHECK(trace.completions.at("R1") == Rational(1));
    CHECK(trace.completions.at("R2") == Rational(1));
    CHECK(trace.flow == Rational(2));
}

TEST_CASE("a lone singleton matches the dependency-aware schedule") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational::of(3, 2)}};
    inst.requests = {{"R", Rational(1), {"X"}}};
    auto a = bcast::simulate_ignore_deps(inst, Rational(2), Baseline::EquiPerItem);
    auto b = bcast::simulate_b_equiset(inst, Rational(2));
    CHECK(a.completions == b.completions);
    CHECK(a.flow == b.flow);
    REQUIRE(a.broadcasts.at("X").size() == b.broadcasts.at("X").size());
    CHECK(a.broadcasts.at("X").front().begin == b.broadcasts.at("X").front().begin);
    CHECK(a.broadcasts.at("X").front().end == b.broadcasts.at("X").front().end);
}

TEST_CASE("late demands wait for a fresh broadcast") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational::of(1, 2), {"X"}}};
    auto trace = bcast::simulate_ignore_deps(inst, Rational(1), Baseline::EquiPerItem);
    REQUIRE(trace.broadcasts.at("X").size() == 2);
    CHECK(trace.completions.at("R1") == Rational(1));
    CHECK(trace.completions.at("R2") == Rational(2));
    CHECK(trace.flow == Rational::of(5, 2));
}

TEST_CASE("equi-per-item splits over items, not demands") {
    // Four unit items demanded at t = 0 at speed 1: every item runs at 1/4,
    // cumulative service at t = 2 is 1/2 per item.
    BroadcastInstance inst;
    for (int i = 0; i < 4; ++i) {
        std::string id = "I" + std::to_string(i);
        inst.items.push_back({id, Rational(1)});
        inst.requests.push_back({"R" + std::to_string(i), Rational(0), {id}});
    }
    auto trace = bcast::simulate_ignore_deps(inst, Rational(1), Baseline::EquiPerItem);
    for (const auto& item : inst.items) {
        CHECK(bcast::integrate_item_rate(trace.schedule, item.id, Rational(0), Rational(2)) ==
              Rational::of(1, 2));
    }
    CHECK(trace.flow == Rational(16)); // all four complete at t = 4
}

TEST_CASE("round robin serves whole quanta in arrival order") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(1)}, {"Y", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational(0), {"Y"}}};
    auto trace = bcast::simulate_ignore_deps(inst, Rational(1), Baseline::RoundRobin);
    CHECK(trace.completions.at("R1") == Rational(1));
    CHECK(trace.completions.at("R2") == Rational(2));
    CHECK(trace.flow == Rational(3));
}

TEST_CASE("round robin interleaves below the item length") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(1)}, {"Y", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational(0), {"Y"}}};
    auto trace =
        bcast::simulate_ignore_deps(inst, Rational(1), Baseline::RoundRobin, Rational::of(1, 2));
    // X runs [0, 1/2] and [1, 3/2]; Y runs [1/2, 1] and [3/2, 2].
    CHECK(trace.broadcasts.at("X").front().begin == Rational(0));
    CHECK(trace.broadcasts.at("X").front().end == Rational::of(3, 2));
    CHECK(trace.broadcasts.at("Y").front().end == Rational(2));
    CHECK(trace.flow == Rational::of(7, 2));
}

TEST_CASE("round robin yields the head on arrivals without losing its turn") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(2)}, {"Y", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational(1), {"Y"}}};
    auto trace =
        bcast::simulate_ignore_deps(inst, Rational(1), Baseline::RoundRobin, Rational(2));
    // X holds the channel through the arrival at t = 1 and finishes its
    // quantum at t = 2; Y then runs to completion.
    CHECK(trace.broadcasts.at("X").front().end == Rational(2));
    CHECK(trace.completions.at("R1") == Rational(2));
    CHECK(trace.completions.at("R2") == Rational(3));
}

TEST_CASE("baselines on figure 1 are dependency-blind but completion-aware") {
    auto inst = fixtures::figure1();
    auto trace = bcast::simulate_ignore_deps(inst, Rational::of(3, 2), Baseline::EquiPerItem);
    bcast::flow_time(trace, inst); // recomputation cross-check
    for (const auto& iv : trace.schedule.intervals) {
        Rational sum = 0;
        for (const auto& [item, rate] : iv.item_rates) sum += rate;
        CHECK(sum <= trace.schedule.speed);
    }
}
