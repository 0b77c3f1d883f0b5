#include <catch2/catch_amalgamated.hpp>

#include "bcast/equiset.hpp"
#include "bcast/schedule.hpp"
#include "fixtures.hpp"

using bcast::BroadcastInstance;
using bcast::InnerPolicy;
using bcast::Rational;

namespace {

Rational interval_sum(const bcast::RateInterval& iv) {
    Rational sum = 0;
    for (const auto& [item, rate] : iv.item_rates) sum += rate;
    return sum;
}

// Every alive request's attributed rates must sum to speed/|R(t)| on every
// interval, and per-item aggregates must equal the attributed sums.
void check_share_exactness(const bcast::BroadcastTrace& trace, const BroadcastInstance& inst) {
    for (const auto& iv : trace.schedule.intervals) {
        std::map<std::string, Rational> share;
        for (const auto& [key, rate] : iv.pair_rates) {
            share[key.first] += rate;
        }
        if (share.empty()) continue; // idle span
        Rational expected = trace.schedule.speed / Rational(static_cast<long long>(share.size()));
        for (const auto& [request, total] : share) {
            INFO("request " << request << " on [" << iv.begin.str() << ", " << iv.end.str() << ")");
            CHECK(total == expected);
        }
        std::map<std::string, Rational> aggregate;
        for (const auto& [key, rate] : iv.pair_rates) aggregate[key.second] += rate;
        CHECK(aggregate == iv.item_rates);
        CHECK(interval_sum(iv) <= trace.schedule.speed);
    }
    bcast::flow_time(trace, inst); // recomputation cross-check
}

} // namespace

TEST_CASE("figure 1 execution is exact") {
    auto inst = fixtures::figure1();
    auto trace = bcast::simulate_b_equiset(inst, Rational::of(3, 2));

    CHECK(trace.completions.at("S1") == Rational::of(11, 3));
    CHECK(trace.completions.at("S2") == Rational::of(31, 6));
    CHECK(trace.completions.at("S3") == Rational::of(35, 6));
    CHECK(trace.completions.at("S4") == Rational(6));
    CHECK(trace.flow == Rational::of(44, 3));

    REQUIRE(trace.broadcasts.at("A").size() == 2);
    CHECK(trace.broadcasts.at("A")[0].begin == Rational(0));
    CHECK(trace.broadcasts.at("A")[0].end == Rational(2));
    CHECK(trace.broadcasts.at("A")[1].begin == Rational(2));
    CHECK(trace.broadcasts.at("A")[1].end == Rational::of(31, 6));
    REQUIRE(trace.broadcasts.at("B").size() == 2);
    CHECK(trace.broadcasts.at("B")[1].begin == Rational(3));
    REQUIRE(trace.broadcasts.at("C").size() == 2);
    CHECK(trace.broadcasts.at("C")[0].end == Rational::of(11, 3));
    CHECK(trace.broadcasts.at("C")[1].end == Rational(6));

    // Rate of A on [1, 2): the folded S2 contribution accelerates the
    // broadcast S1 started, 3/2 * (1/2 + 1/2 * 1/3) = 1.
    bool saw = false;
    for (const auto& iv : trace.schedule.intervals) {
        if (iv.begin == Rational(1)) {
            CHECK(iv.item_rates.at("A") == Rational(1));
            CHECK(iv.pair_rates.at({"S2", "A"}) == Rational::of(3, 4));
            CHECK(iv.pair_rates.at({"S1", "A"}) == Rational::of(1, 4));
            saw = true;
        }
    }
    CHECK(saw);

    check_share_exactness(trace, inst);

    // Broadcast-interval integral check: each recorded interval carries
    // exactly the item's length.
    for (const auto& [item, list] : trace.broadcasts) {
        for (const auto& b : list) {
            CHECK(bcast::integrate_item_rate(trace.schedule, item, b.begin, b.end) ==
                  Rational::of(3, 2));
        }
    }
}

TEST_CASE("single request gets the whole bandwidth") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(2)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    auto trace = bcast::simulate_b_equiset(inst, Rational(2));
    CHECK(trace.completions.at("R") == Rational(1));
    CHECK(trace.flow == Rational(1));
}

TEST_CASE("two disjoint singletons split the bandwidth") {
    BroadcastInstance inst;
    inst.items = {{"X", Rational(1)}, {"Y", Rational(1)}};
    inst.requests = {{"R1", Rational(0), {"X"}}, {"R2", Rational(0), {"Y"}}};
    auto trace = bcast::simulate_b_equiset(inst, Rational(1));
    CHECK(trace.completions.at("R1") == Rational(2));
    CHECK(trace.completions.at("R2") == Rational(2));
    CHECK(trace.flow == Rational(4));
    CHECK(trace.schedule.intervals.front().item_rates.at("X") == Rational::of(1, 2));
}

TEST_CASE("simulator idles until the first arrival") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(1)}};
    inst.requests = {{"R", Rational(5), {"I"}}};
    auto trace = bcast::simulate_b_equiset(inst, Rational(1));
    CHECK(trace.completions.at("R") == Rational(6));
    CHECK(trace.flow == Rational(1));
    REQUIRE(!trace.schedule.intervals.empty());
    CHECK(trace.schedule.intervals.front().item_rates.empty());
    CHECK(trace.schedule.intervals.front().end == Rational(5));
    CHECK(trace.broadcasts.at("I").front().begin == Rational(5));
}

TEST_CASE("empty request list yields an empty trace") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(1)}};
    auto trace = bcast::simulate_b_equiset(inst, Rational(1));
    CHECK(trace.flow == Rational(0));
    CHECK(trace.completions.empty());
    CHECK(trace.schedule.intervals.empty());
}

TEST_CASE("min-idx policy keeps request shares intact") {
    auto inst = fixtures::figure1();
    auto trace = bcast::simulate_b_equiset(inst, Rational::of(3, 2), InnerPolicy::min_idx());
    check_share_exactness(trace, inst);
    // All bandwidth of S1 goes to A first, so A completes at t = 1.
    CHECK(trace.broadcasts.at("A").front().end == Rational(1));
}

TEST_CASE("custom policies are validated against their share") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(1)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    auto cheat = InnerPolicy::custom_split(
        [](const bcast::Request&, const std::vector<std::string>& items, const Rational& share) {
            std::map<std::string, Rational> rates;
            rates[items.front()] = share / Rational(2);
            return rates;
        });
    CHECK_THROWS_AS(bcast::simulate_b_equiset(inst, Rational(1), cheat),
                    bcast::PolicyContractViolation);
}

TEST_CASE("next_event closed forms") {
    BroadcastInstance inst;
    inst.items = {{"I", Rational(1)}};
    inst.requests = {{"R", Rational(0), {"I"}}};
    bcast::IndexedInstance idx(inst);

    bcast::SimState state(idx);
    state.arrived[0] = true;
    state.next_arrival = 1;
    state.open[0] = true;
    state.work[0] = Rational::of(1, 2);
    auto t = bcast::next_event(state, {{"I", Rational::of(1, 3)}});
    REQUIRE(t);
    CHECK(*t == Rational::of(3, 2)); // remaining 1/2 at rate 1/3

    // An arrival before any completion wins.
    BroadcastInstance two = inst;
    two.requests.push_back({"R2", Rational(1), {"I"}});
    bcast::IndexedInstance idx2(two);
    bcast::SimState state2(idx2);
    state2.arrived[0] = true;
    state2.next_arrival = 1;
    state2.open[0] = true;
    state2.work[0] = Rational::of(1, 2);
    auto t2 = bcast::next_event(state2, {{"I", Rational::of(1, 10)}});
    REQUIRE(t2);
    CHECK(*t2 == Rational(1));

    // No rates, no pending arrivals: termination signal.
    bcast::SimState idle(idx);
    idle.arrived[0] = true;
    idle.next_arrival = 1;
    CHECK(!bcast::next_event(idle, {}));
}

TEST_CASE("next_event matches the figure 1 state at time 1") {
    auto inst = fixtures::figure1();
    bcast::IndexedInstance idx(inst);
    bcast::SimState state(idx);
    state.now = Rational(1);
    state.arrived = {true, true, false, false};
    state.next_arrival = 2;
    for (int i = 0; i < 3; ++i) {
        state.open[i] = true;
        state.work[i] = Rational::of(1, 2);
    }
    auto t = bcast::next_event(state, {{"A", Rational(1)},
                                       {"B", Rational::of(1, 4)},
                                       {"C", Rational::of(1, 4)}});
    REQUIRE(t);
    CHECK(*t == Rational(2)); // A's completion precedes the arrival at 2
}
