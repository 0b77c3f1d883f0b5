#pragma once

#include "bcast/instance.hpp"
#include "bcast/schedule.hpp"

namespace fixtures {

using bcast::Rational;

// Three items of length 3/2; one request for all of them at t = 0 and one
// singleton per item arriving at t = 1, 2, 3.
inline bcast::BroadcastInstance figure1() {
    bcast::BroadcastInstance inst;
    inst.items = {{"A", Rational::of(3, 2)}, {"B", Rational::of(3, 2)}, {"C", Rational::of(3, 2)}};
    inst.requests = {{"S1", Rational(0), {"A", "B", "C"}},
                     {"S2", Rational(1), {"A"}},
                     {"S3", Rational(2), {"B"}},
                     {"S4", Rational(3), {"C"}}};
    return inst;
}

// A unit-bandwidth schedule of the figure1 instance with total flow 11:
// the first broadcast of C is split around A and B so that S1 finishes at
// 4.5, and C is rebroadcast afterwards for S4.
inline bcast::RateSchedule figure1_optimal_schedule() {
    bcast::RateSchedule s;
    s.speed = Rational(1);
    auto span = [&](long long b_num, long long b_den, long long e_num, long long e_den,
                    const std::string& item) {
        bcast::RateInterval iv;
        iv.begin = Rational::of(b_num, b_den);
        iv.end = Rational::of(e_num, e_den);
        iv.item_rates[item] = Rational(1);
        s.intervals.push_back(std::move(iv));
    };
    span(0, 1, 1, 1, "C");
    span(1, 1, 5, 2, "A");
    span(5, 2, 4, 1, "B");
    span(4, 1, 9, 2, "C");
    span(9, 2, 6, 1, "C");
    return s;
}

} // namespace fixtures
