#pragma once

#include <deque>

#include "bcast/equiset.hpp"

namespace bcast {

// Dependency-ignoring reference schedulers. Each outstanding
// (request, item) demand is treated as an independent single-item request;
// the scheduler looks only at which items have outstanding demands.
// Request completions are still computed with the dependency-aware rule.
enum class Baseline {
    EquiPerItem, // equal bandwidth over every item with an outstanding demand
    RoundRobin,  // full bandwidth to one item at a time, fixed work quantum
};

namespace detail {

// Demands of request r on item i that are still outstanding.
inline std::vector<std::pair<int, int>> alive_demands(const SimState& state, int item) {
    std::vector<std::pair<int, int>> demands;
    const IndexedInstance& idx = *state.idx;
    for (int r = 0; r < idx.requests(); ++r) {
        if (!state.request_alive(r)) continue;
        auto& members = idx.request_items[r];
        for (size_t k = 0; k < members.size(); ++k) {
            if (members[k] == item && !state.pair_done[r][k]) demands.push_back({r, item});
        }
    }
    return demands;
}

inline BroadcastTrace run_equi_per_item(const IndexedInstance& idx, const Rational& speed) {
    return run_broadcast_sim(idx, speed, [&](const SimState& state) {
        std::map<std::pair<int, int>, Rational> rates;
        std::vector<std::vector<std::pair<int, int>>> demands_of(idx.items());
        int alive_items = 0;
        for (int i = 0; i < idx.items(); ++i) {
            demands_of[i] = alive_demands(state, i);
            if (!demands_of[i].empty()) ++alive_items;
        }
        if (alive_items == 0) return rates;
        Rational per_item = speed / Rational(alive_items);
        for (int i = 0; i < idx.items(); ++i) {
            if (demands_of[i].empty()) continue;
            Rational per_demand = per_item / Rational(static_cast<long long>(demands_of[i].size()));
            for (const auto& d : demands_of[i]) rates[d] += per_demand;
        }
        return rates;
    });
}

// Round robin keeps its own loop: quantum expiry is an event the shared
// loop does not know about.
inline BroadcastTrace run_round_robin(const IndexedInstance& idx, const Rational& speed,
                                      const Rational& quantum) {
    SimState state(idx);
    BroadcastTrace trace;
    trace.schedule.speed = speed;
    trace.flow = 0;
    for (int i = 0; i < idx.items(); ++i) trace.broadcasts[idx.item_id(i)] = {};

    std::deque<int> queue;
    std::vector<bool> queued(idx.items(), false);
    Rational quantum_left = quantum;

    auto refresh_queue = [&]() {
        // Enqueue newly alive items in instance order; drop dead ones.
        for (int i = 0; i < idx.items(); ++i) {
            bool alive = !alive_demands(state, i).empty();
            if (alive && !queued[i]) {
                queue.push_back(i);
                queued[i] = true;
            }
        }
        while (!queue.empty() && alive_demands(state, queue.front()).empty()) {
            queued[queue.front()] = false;
            queue.pop_front();
        }
    };

    admit_due_arrivals(state);
    refresh_queue();

    while (!state.finished()) {
        if (queue.empty()) {
            auto a = state.pending_arrival();
            if (!a) break;
            RateInterval idle;
            idle.begin = state.now;
            idle.end = *a;
            trace.schedule.intervals.push_back(std::move(idle));
            state.now = *a;
            admit_due_arrivals(state);
            refresh_queue();
            continue;
        }

        int head = queue.front();
        Rational remaining = idx.length(head) - state.work[head];
        Rational burst = min(remaining, quantum_left);
        Rational until = state.now + burst / speed;
        bool interrupted = false;
        if (auto a = state.pending_arrival(); a && *a < until) {
            until = *a;
            burst = speed * (*a - state.now);
            interrupted = true;
        }

        if (!state.open[head]) {
            state.open[head] = true;
            state.begin[head] = state.now;
            state.work[head] = 0;
        }

        RateInterval interval;
        interval.begin = state.now;
        interval.end = until;
        interval.item_rates[idx.item_id(head)] = speed;
        auto demands = alive_demands(state, head);
        Rational per_demand = speed / Rational(static_cast<long long>(demands.size()));
        for (const auto& [r, i] : demands) {
            interval.pair_rates[{idx.request_id(r), idx.item_id(i)}] += per_demand;
        }
        trace.schedule.intervals.push_back(std::move(interval));

        state.work[head] += burst;
        quantum_left -= burst;
        state.now = until;

        bool completed = state.work[head] == idx.length(head);
        finish_broadcasts(state, trace);
        admit_due_arrivals(state);

        if (completed || (quantum_left.is_zero() && !interrupted)) {
            // Head used its turn: move to the tail with a fresh quantum.
            queued[head] = false;
            queue.pop_front();
            quantum_left = quantum;
        }
        refresh_queue();
    }

    trace.horizon = state.now;
    return trace;
}

} // namespace detail

inline BroadcastTrace simulate_ignore_deps(const BroadcastInstance& inst, const Rational& speed,
                                           Baseline baseline,
                                           const Rational& quantum = Rational(1)) {
    if (speed.sign() <= 0) throw ValidationError("speed must be positive");
    if (quantum.sign() <= 0) throw ValidationError("quantum must be positive");
    IndexedInstance idx(inst);
    switch (baseline) {
    case Baseline::EquiPerItem:
        return detail::run_equi_per_item(idx, speed);
    case Baseline::RoundRobin:
        return detail::run_round_robin(idx, speed, quantum);
    }
    throw Error("unreachable");
}

} // namespace bcast
