#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcast/instance.hpp"
#include "bcast/schedule.hpp"

namespace bcast {

// How a request's bandwidth share is split over its alive items.
// EquiWithin divides the share evenly; MinIdx gives all of it to the
// lowest-indexed alive item (instance order). Custom splits must be
// deterministic, memoryless functions of (request, alive items, share)
// and return non-negative rates summing exactly to the share.
struct InnerPolicy {
    enum class Kind { EquiWithin, MinIdx, Custom };
    using SplitFn = std::function<std::map<std::string, Rational>(
        const Request&, const std::vector<std::string>&, const Rational&)>;

    Kind kind = Kind::EquiWithin;
    SplitFn custom;

    static InnerPolicy equi_within() { return {Kind::EquiWithin, nullptr}; }
    static InnerPolicy min_idx() { return {Kind::MinIdx, nullptr}; }
    static InnerPolicy custom_split(SplitFn fn) { return {Kind::Custom, std::move(fn)}; }

    std::map<std::string, Rational> split(const Request& request,
                                          const std::vector<std::string>& alive_items,
                                          const Rational& share) const {
        std::map<std::string, Rational> rates;
        switch (kind) {
        case Kind::EquiWithin: {
            Rational each = share / Rational(static_cast<long long>(alive_items.size()));
            for (const std::string& item : alive_items) rates[item] = each;
            break;
        }
        case Kind::MinIdx:
            rates[alive_items.front()] = share;
            break;
        case Kind::Custom:
            rates = custom(request, alive_items, share);
            break;
        }
        Rational sum = 0;
        for (const auto& [item, rate] : rates) {
            if (rate.sign() < 0) {
                throw PolicyContractViolation("negative rate for " + request.id + ":" + item);
            }
            bool known = false;
            for (const std::string& alive : alive_items) known = known || alive == item;
            if (!known) {
                throw PolicyContractViolation("rate for item not alive in " + request.id + ": " + item);
            }
            sum += rate;
        }
        if (sum != share) {
            throw PolicyContractViolation("split for " + request.id + " sums to " + sum.str() +
                                          ", share is " + share.str());
        }
        return rates;
    }
};

// Live simulation state. A request is alive when it has arrived and some
// requested item's post-arrival download has not completed; an item has an
// in-progress broadcast when its cumulative work sits strictly between 0
// and its length.
struct SimState {
    const IndexedInstance* idx = nullptr;
    Rational now;
    std::vector<bool> arrived;                // per request
    std::vector<bool> served;                 // per request
    std::vector<std::vector<bool>> pair_done; // [request][position in request_items]
    std::vector<bool> open;                   // per item: broadcast in progress
    std::vector<Rational> begin;              // per item: begin of open broadcast
    std::vector<Rational> work;               // per item: work of open broadcast
    std::vector<int> arrival_order;           // request indices sorted by arrival
    size_t next_arrival = 0;

    explicit SimState(const IndexedInstance& indexed)
        : idx(&indexed),
          now(0),
          arrived(indexed.requests(), false),
          served(indexed.requests(), false),
          open(indexed.items(), false),
          begin(indexed.items(), Rational(0)),
          work(indexed.items(), Rational(0)) {
        for (int r = 0; r < indexed.requests(); ++r) {
            pair_done.emplace_back(indexed.request_items[r].size(), false);
            arrival_order.push_back(r);
        }
        std::stable_sort(arrival_order.begin(), arrival_order.end(), [&](int a, int b) {
            return indexed.arrival(a) < indexed.arrival(b);
        });
    }

    bool request_alive(int r) const { return arrived[r] && !served[r]; }

    std::vector<int> alive_requests() const {
        std::vector<int> alive;
        for (int r = 0; r < idx->requests(); ++r) {
            if (request_alive(r)) alive.push_back(r);
        }
        return alive;
    }

    // Alive items of request r, in instance order.
    std::vector<int> alive_items(int r) const {
        std::vector<int> out;
        for (size_t k = 0; k < idx->request_items[r].size(); ++k) {
            if (!pair_done[r][k]) out.push_back(idx->request_items[r][k]);
        }
        return out;
    }

    std::optional<Rational> pending_arrival() const {
        if (next_arrival >= arrival_order.size()) return std::nullopt;
        return idx->arrival(arrival_order[next_arrival]);
    }

    bool finished() const {
        if (pending_arrival()) return false;
        for (int r = 0; r < idx->requests(); ++r) {
            if (!served[r]) return false;
        }
        return true;
    }
};

// Earliest future event under the given constant per-item rates: the next
// arrival, or the first moment some item's in-progress broadcast reaches
// its length. Returns nullopt when no event lies ahead (termination).
inline std::optional<Rational> next_event(const SimState& state,
                                          const std::map<std::string, Rational>& item_rates) {
    std::optional<Rational> soonest = state.pending_arrival();
    for (int i = 0; i < state.idx->items(); ++i) {
        auto it = item_rates.find(state.idx->item_id(i));
        if (it == item_rates.end() || it->second.is_zero()) continue;
        Rational remaining = state.idx->length(i) - state.work[i];
        Rational t = state.now + remaining / it->second;
        if (!soonest || t < *soonest) soonest = t;
    }
    return soonest;
}

namespace detail {

inline void admit_due_arrivals(SimState& state) {
    while (auto a = state.pending_arrival()) {
        if (*a > state.now) break;
        state.arrived[state.arrival_order[state.next_arrival]] = true;
        ++state.next_arrival;
    }
}

// Close every broadcast whose work reached its length. A completion at
// time t serves exactly the alive requests whose arrival is at or before
// the broadcast's begin.
inline void finish_broadcasts(SimState& state, BroadcastTrace& trace) {
    const IndexedInstance& idx = *state.idx;
    for (int i = 0; i < idx.items(); ++i) {
        if (!state.open[i] || state.work[i] != idx.length(i)) continue;
        trace.broadcasts[idx.item_id(i)].push_back({state.begin[i], state.now});
        state.open[i] = false;
        state.work[i] = 0;
        for (int r = 0; r < idx.requests(); ++r) {
            if (!state.request_alive(r)) continue;
            if (idx.arrival(r) > state.begin[i]) continue;
            auto& members = idx.request_items[r];
            bool all_done = true;
            for (size_t k = 0; k < members.size(); ++k) {
                if (members[k] == i) state.pair_done[r][k] = true;
                all_done = all_done && state.pair_done[r][k];
            }
            if (all_done) {
                state.served[r] = true;
                trace.completions[idx.request_id(r)] = state.now;
                trace.flow += state.now - idx.arrival(r);
            }
        }
    }
}

// Shared event loop: `rate_fn` computes the per-pair rates for the current
// interval from the live state. Used by B-EquiSet and by the
// dependency-ignoring baselines, which differ only in that choice.
template <typename RateFn>
BroadcastTrace run_broadcast_sim(const IndexedInstance& idx, const Rational& speed,
                                 RateFn&& rate_fn) {
    SimState state(idx);
    BroadcastTrace trace;
    trace.schedule.speed = speed;
    trace.flow = 0;
    for (int i = 0; i < idx.items(); ++i) trace.broadcasts[idx.item_id(i)] = {};

    admit_due_arrivals(state);

    while (!state.finished()) {
        // Per (request, item) rates for this interval.
        std::map<std::pair<int, int>, Rational> pair_rates = rate_fn(state);

        std::map<std::string, Rational> item_rates;
        std::map<int, Rational> item_rate_by_index;
        for (const auto& [key, rate] : pair_rates) {
            if (rate.is_zero()) continue;
            item_rate_by_index[key.second] += rate;
        }
        for (const auto& [i, rate] : item_rate_by_index) {
            item_rates[idx.item_id(i)] = rate;
            if (!state.open[i]) {
                state.open[i] = true;
                state.begin[i] = state.now;
                state.work[i] = 0;
            }
        }

        auto t = next_event(state, item_rates);
        if (!t) break; // nothing alive, nothing pending
        Rational step = *t - state.now;
        if (step.sign() <= 0) {
            throw Error("simulation failed to advance at t = " + state.now.str());
        }

        RateInterval interval;
        interval.begin = state.now;
        interval.end = *t;
        for (const auto& [key, rate] : pair_rates) {
            if (rate.is_zero()) continue;
            interval.pair_rates[{idx.request_id(key.first), idx.item_id(key.second)}] = rate;
        }
        interval.item_rates = item_rates;
        trace.schedule.intervals.push_back(std::move(interval));
        for (const auto& [i, rate] : item_rate_by_index) {
            state.work[i] += rate * step;
        }
        state.now = *t;

        // Completions are applied before arrivals at the same timestamp;
        // rates are recomputed after both. When nothing is alive the next
        // pass records an idle interval up to the following arrival.
        finish_broadcasts(state, trace);
        admit_due_arrivals(state);
    }

    trace.horizon = state.now;
    return trace;
}

} // namespace detail

// B-EquiSet: every alive request receives speed/|R(t)|; the inner policy
// splits that share over the request's alive items. A contribution from a
// request that arrived after the item's current broadcast began still
// accelerates that broadcast; the request itself is served only by a
// broadcast beginning at or after its arrival.
inline BroadcastTrace simulate_b_equiset(const BroadcastInstance& inst, const Rational& speed,
                                         const InnerPolicy& policy = InnerPolicy::equi_within()) {
    if (speed.sign() <= 0) throw ValidationError("speed must be positive");
    IndexedInstance idx(inst);
    return detail::run_broadcast_sim(idx, speed, [&](const SimState& state) {
        std::map<std::pair<int, int>, Rational> rates;
        std::vector<int> alive = state.alive_requests();
        if (alive.empty()) return rates;
        Rational share = speed / Rational(static_cast<long long>(alive.size()));
        for (int r : alive) {
            std::vector<int> items = state.alive_items(r);
            std::vector<std::string> ids;
            for (int i : items) ids.push_back(idx.item_id(i));
            auto split = policy.split(inst.requests[r], ids, share);
            for (const auto& [id, rate] : split) {
                if (rate.is_zero()) continue;
                rates[{r, idx.item_index.at(id)}] += rate;
            }
        }
        return rates;
    });
}

} // namespace bcast
