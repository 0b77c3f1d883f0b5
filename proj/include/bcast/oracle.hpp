#pragma once

#include <algorithm>
#include <limits>
#include <cstdint>
#include <functional>
#include <unordered_map>

#include "bcast/instance.hpp"
#include "bcast/jobs.hpp"
#include "bcast/schedule.hpp"

namespace bcast {

// Sequential, slot-aligned, full-rate unit-bandwidth schedule: each slot
// broadcasts at most one item at rate 1. An item's k-th broadcast is the
// k-th maximal group of its slots whose work sums to the item length, so
// a broadcast may pause while other items use the channel.
struct DiscreteSchedule {
    Rational slot;
    int horizon = 0;        // slot count
    std::vector<int> slots; // item index per slot, -1 = idle
};

inline RateSchedule to_rate_schedule(const DiscreteSchedule& ds, const BroadcastInstance& inst) {
    RateSchedule schedule;
    schedule.speed = Rational(1);
    int k = 0;
    while (k < static_cast<int>(ds.slots.size())) {
        int run = k;
        while (run < static_cast<int>(ds.slots.size()) && ds.slots[run] == ds.slots[k]) ++run;
        if (ds.slots[k] >= 0) {
            RateInterval iv;
            iv.begin = Rational(k) * ds.slot;
            iv.end = Rational(run) * ds.slot;
            iv.item_rates[inst.items[ds.slots[k]].id] = Rational(1);
            schedule.intervals.push_back(std::move(iv));
        }
        k = run;
    }
    return schedule;
}

struct VerifyResult {
    std::optional<BroadcastTrace> trace;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Recomputes broadcast intervals, request completions and flow from the
// raw rates alone. This is the executable form of the model definitions
// and is deliberately independent of the simulators' own bookkeeping.
inline VerifyResult verify_schedule(const RateSchedule& rates, const BroadcastInstance& inst,
                                    const Rational& speed) {
    VerifyResult result;
    ValidationReport inst_report = validate_instance(inst);
    if (!inst_report.ok()) {
        result.violations.push_back("invalid instance: " + inst_report.issues.front().message);
        return result;
    }

    Rational prev_end;
    bool first = true;
    for (const RateInterval& iv : rates.intervals) {
        if (iv.begin >= iv.end) {
            result.violations.push_back("degenerate interval at " + iv.begin.str());
        }
        if (!first && iv.begin < prev_end) {
            result.violations.push_back("intervals overlap at " + iv.begin.str());
        }
        prev_end = iv.end;
        first = false;

        Rational total = 0;
        for (const auto& [item, rate] : iv.item_rates) {
            if (rate.sign() < 0) {
                result.violations.push_back("negative rate for " + item + " at " + iv.begin.str());
            }
            total += rate;
        }
        if (total > speed) {
            result.violations.push_back("capacity exceeded at " + iv.begin.str() + ": " +
                                        total.str() + " > " + speed.str());
        }
        if (!iv.pair_rates.empty()) {
            std::map<std::string, Rational> sums;
            for (const auto& [key, rate] : iv.pair_rates) sums[key.second] += rate;
            for (const auto& [item, sum] : sums) {
                auto it = iv.item_rates.find(item);
                if (it == iv.item_rates.end() || it->second != sum) {
                    result.violations.push_back("attributed rates of " + item +
                                                " disagree with aggregate at " + iv.begin.str());
                }
            }
        }
    }
    if (!result.violations.empty()) return result;

    BroadcastTrace trace;
    trace.schedule = rates;
    trace.schedule.speed = speed;
    trace.flow = 0;
    trace.horizon = rates.intervals.empty() ? Rational(0) : rates.intervals.back().end;

    // Per-item broadcast decomposition: work accumulates through the open
    // broadcast; each time it reaches the item length a broadcast closes,
    // and the next one begins at the next instant of positive rate.
    for (const Item& item : inst.items) {
        std::vector<Broadcast> list;
        bool open = false;
        Rational begin;
        Rational work = 0;
        for (const RateInterval& iv : rates.intervals) {
            auto it = iv.item_rates.find(item.id);
            if (it == iv.item_rates.end() || it->second.is_zero()) continue;
            Rational t = iv.begin;
            Rational rate = it->second;
            if (!open) {
                open = true;
                begin = t;
            }
            while (t < iv.end) {
                Rational to_completion = (item.length - work) / rate;
                if (t + to_completion <= iv.end) {
                    t += to_completion;
                    list.push_back({begin, t});
                    work = 0;
                    open = t < iv.end;
                    begin = t;
                } else {
                    work += rate * (iv.end - t);
                    t = iv.end;
                }
            }
        }
        trace.broadcasts[item.id] = std::move(list);
    }

    for (const Request& req : inst.requests) {
        Rational completion = req.arrival;
        bool served = true;
        for (const std::string& item : req.items) {
            auto c = download_completion(trace, item, req.arrival);
            if (!c) {
                result.violations.push_back("unserved request " + req.id + " (item " + item + ")");
                served = false;
                break;
            }
            completion = max(completion, *c);
        }
        if (!served) continue;
        trace.completions[req.id] = completion;
        trace.flow += completion - req.arrival;
    }
    if (!result.violations.empty()) return result;

    result.trace = std::move(trace);
    return result;
}

struct OracleResult {
    Rational flow;
    DiscreteSchedule schedule;
};

// Offline heuristic: among arrived unserved requests, repeatedly serve the
// one with the fewest remaining items, broadcasting its first missing item
// at full rate. On the adversarial workloads this realizes the
// singletons-first schedule whose flow is n + sqrt(n)(sqrt(n)+1)/2.
inline OracleResult greedy_upper_bound(const BroadcastInstance& inst) {
    IndexedInstance idx(inst);
    Rational h = 0;
    for (const Item& item : inst.items) h = rational_gcd(h, item.length);
    for (const Request& req : inst.requests) h = rational_gcd(h, req.arrival);
    if (h.is_zero()) h = Rational(1);

    std::vector<std::vector<bool>> pair_done;
    for (int r = 0; r < idx.requests(); ++r) {
        pair_done.emplace_back(idx.request_items[r].size(), false);
    }
    std::vector<bool> served(idx.requests(), false);

    DiscreteSchedule ds;
    ds.slot = h;
    Rational now = 0;
    Rational flow = 0;
    int left = idx.requests();

    while (left > 0) {
        int pick = -1;
        size_t pick_undone = 0;
        Rational next_arrival;
        bool have_next = false;
        for (int r = 0; r < idx.requests(); ++r) {
            if (served[r]) continue;
            if (idx.arrival(r) > now) {
                if (!have_next || idx.arrival(r) < next_arrival) {
                    next_arrival = idx.arrival(r);
                    have_next = true;
                }
                continue;
            }
            size_t undone = 0;
            for (bool done : pair_done[r]) undone += done ? 0 : 1;
            if (pick < 0 || undone < pick_undone ||
                (undone == pick_undone && idx.arrival(r) < idx.arrival(pick))) {
                pick = r;
                pick_undone = undone;
            }
        }
        if (pick < 0) {
            now = next_arrival; // idle until someone arrives
            continue;
        }

        int item = -1;
        for (size_t k = 0; k < idx.request_items[pick].size(); ++k) {
            if (!pair_done[pick][k]) {
                item = idx.request_items[pick][k];
                break;
            }
        }
        Rational begin = now;
        Rational end = now + idx.length(item);
        long long s0 = static_cast<long long>(exact_quotient(begin, h));
        long long s1 = static_cast<long long>(exact_quotient(end, h));
        if (static_cast<long long>(ds.slots.size()) < s1) ds.slots.resize(s1, -1);
        for (long long s = s0; s < s1; ++s) ds.slots[s] = item;

        for (int r = 0; r < idx.requests(); ++r) {
            if (served[r] || idx.arrival(r) > begin) continue;
            auto& members = idx.request_items[r];
            bool all_done = true;
            for (size_t k = 0; k < members.size(); ++k) {
                if (members[k] == item) pair_done[r][k] = true;
                all_done = all_done && pair_done[r][k];
            }
            if (all_done) {
                served[r] = true;
                --left;
                flow += end - idx.arrival(r);
            }
        }
        now = end;
    }

    ds.horizon = static_cast<int>(ds.slots.size());
    return {flow, ds};
}

namespace detail {

struct BnbLimits {
    static constexpr int max_items = 8;
    static constexpr int max_pairs = 16;
    static constexpr int max_work = 15;
    static constexpr int max_slots = 63;
};

struct Hash128 {
    std::size_t operator()(unsigned __int128 v) const {
        std::uint64_t lo = static_cast<std::uint64_t>(v);
        std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
        std::uint64_t z = lo ^ (hi * 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        return static_cast<std::size_t>(z ^ (z >> 31));
    }
};

} // namespace detail

inline constexpr long long kDefaultOracleBudget = 20'000'000;

// Exact minimum flow over the discrete schedule class, by depth-first
// branch and bound over per-slot actions. The lower bound charges each
// unserved request the work its hardest missing item still needs; a
// dominance cache keyed by (slot, open work, per-pair service state)
// prunes revisits that cannot improve. Deterministic: children are tried
// most-served-requests-first and only strict improvements move the
// incumbent.
inline OracleResult brute_force_bopt(const BroadcastInstance& inst, const Rational& slot,
                                     int horizon, long long budget = kDefaultOracleBudget) {
    IndexedInstance idx(inst);
    if (slot.sign() <= 0) throw ValidationError("slot must be positive");
    const int n = idx.items();
    const int q = idx.requests();

    std::vector<int> length_slots(n);
    for (int i = 0; i < n; ++i) {
        if (!divides(slot, idx.length(i))) {
            throw ValidationError("slot does not divide length of " + idx.item_id(i));
        }
        length_slots[i] = static_cast<int>(exact_quotient(idx.length(i), slot));
    }
    std::vector<int> arrival_slots(q);
    for (int r = 0; r < q; ++r) {
        if (!divides(slot, idx.arrival(r))) {
            throw ValidationError("slot does not divide arrival of " + idx.request_id(r));
        }
        arrival_slots[r] = static_cast<int>(exact_quotient(idx.arrival(r), slot));
    }

    int pairs = 0;
    std::vector<std::pair<int, int>> pair_list; // (request, item)
    std::vector<std::vector<int>> pairs_of_request(q), pairs_of_item(n);
    for (int r = 0; r < q; ++r) {
        for (int i : idx.request_items[r]) {
            pairs_of_request[r].push_back(pairs);
            pairs_of_item[i].push_back(pairs);
            pair_list.push_back({r, i});
            ++pairs;
        }
    }
    using detail::BnbLimits;
    if (n > BnbLimits::max_items || pairs > BnbLimits::max_pairs ||
        horizon > BnbLimits::max_slots) {
        throw ScaleExceeded("oracle scale exceeded: state does not pack");
    }
    for (int i = 0; i < n; ++i) {
        if (length_slots[i] > BnbLimits::max_work) {
            throw ScaleExceeded("oracle scale exceeded: item too long for the slot");
        }
    }
    for (int r = 0; r < q; ++r) {
        if (arrival_slots[r] >= horizon) {
            throw Infeasible("request " + idx.request_id(r) + " arrives at or after the horizon");
        }
    }

    // Pair service state: 0 = waiting for a qualifying broadcast to begin,
    // 1 = the open broadcast qualifies, 2 = done.
    enum : unsigned { kNew = 0, kQual = 1, kDone = 2 };

    struct Node {
        int at = 0;                  // current slot
        std::vector<int> open;       // per item, work of open broadcast (slots)
        std::vector<unsigned> pair;  // per pair, service state
        std::vector<bool> served;    // per request
        long long accrued = 0;       // alive-request slots so far
    };

    auto pack = [&](const Node& node) {
        unsigned __int128 key = static_cast<unsigned>(node.at);
        for (int i = 0; i < n; ++i) key = (key << 4) | static_cast<unsigned>(node.open[i]);
        for (int p = 0; p < pairs; ++p) key = (key << 2) | node.pair[p];
        return key;
    };

    auto arrived = [&](const Node& node, int r) { return arrival_slots[r] <= node.at; };

    auto lower_bound = [&](const Node& node) {
        long long bound = node.accrued;
        for (int r = 0; r < q; ++r) {
            if (node.served[r]) continue;
            int need = 0;
            for (int p : pairs_of_request[r]) {
                if (node.pair[p] == kDone) continue;
                int i = pair_list[p].second;
                int this_need = (node.pair[p] == kQual)
                                    ? length_slots[i] - node.open[i]
                                    : (node.open[i] > 0 ? 2 * length_slots[i] - node.open[i]
                                                        : length_slots[i]);
                need = std::max(need, this_need);
            }
            bound += need;
        }
        return bound;
    };

    long long nodes = 0;
    std::unordered_map<unsigned __int128, long long, detail::Hash128> seen;

    // The greedy schedule seeds the incumbent, but only when it fits this
    // horizon and slot; its flow is unattainable otherwise.
    long long incumbent = std::numeric_limits<long long>::max();
    std::vector<int> best_actions;
    bool have_witness = false;
    OracleResult greedy = greedy_upper_bound(inst);
    if (greedy.schedule.slot == slot && static_cast<int>(greedy.schedule.slots.size()) <= horizon) {
        incumbent = static_cast<long long>(exact_quotient(greedy.flow, slot));
        best_actions = greedy.schedule.slots;
        best_actions.resize(horizon, -1);
        have_witness = true;
    }

    std::vector<int> actions(horizon, -1);

    // Boundary bookkeeping at slot node.at: completions, then arrivals,
    // then the per-slot accrual for arrived unserved requests.
    auto settle = [&](Node& node, int completed_item) {
        if (completed_item >= 0) {
            for (int p : pairs_of_item[completed_item]) {
                if (node.pair[p] == kQual) node.pair[p] = kDone;
            }
            for (int r = 0; r < q; ++r) {
                if (node.served[r]) continue;
                bool all = true;
                for (int p : pairs_of_request[r]) all = all && node.pair[p] == kDone;
                if (all) node.served[r] = true;
            }
        }
    };

    std::function<void(Node&)> dfs = [&](Node& node) {
        if (++nodes > budget) throw ScaleExceeded("oracle scale exceeded: node budget");

        bool all_served = true;
        for (int r = 0; r < q; ++r) all_served = all_served && node.served[r];
        if (all_served) {
            if (node.accrued < incumbent || (node.accrued == incumbent && !have_witness)) {
                incumbent = node.accrued;
                best_actions = actions;
                for (int s = node.at; s < horizon; ++s) best_actions[s] = -1;
                have_witness = true;
            }
            return;
        }
        if (node.at >= horizon) return;

        long long bound = lower_bound(node);
        if (bound > incumbent || (bound == incumbent && have_witness)) return;

        auto key = pack(node);
        auto it = seen.find(key);
        if (it != seen.end() && it->second <= node.accrued) return;
        seen[key] = node.accrued;

        long long slot_cost = 0;
        for (int r = 0; r < q; ++r) {
            if (!node.served[r] && arrived(node, r)) ++slot_cost;
        }

        // Children: useful items ordered by how many alive requests still
        // need them; idle only while arrivals are pending.
        std::vector<std::pair<int, int>> order; // (-needers, item)
        for (int i = 0; i < n; ++i) {
            int needers = 0;
            bool useful = node.open[i] > 0;
            for (int p : pairs_of_item[i]) {
                int r = pair_list[p].first;
                if (node.pair[p] != kDone && !node.served[r] && arrived(node, r)) {
                    ++needers;
                    useful = true;
                }
            }
            if (useful) order.push_back({-needers, i});
        }
        std::sort(order.begin(), order.end());

        bool arrivals_pending = false;
        for (int r = 0; r < q; ++r) arrivals_pending = arrivals_pending || arrival_slots[r] > node.at;

        for (const auto& [neg, i] : order) {
            Node child = node;
            child.accrued += slot_cost;
            child.at = node.at + 1;
            if (child.open[i] == 0) {
                for (int p : pairs_of_item[i]) {
                    int r = pair_list[p].first;
                    if (child.pair[p] == kNew && !child.served[r] && arrived(node, r)) {
                        child.pair[p] = kQual;
                    }
                }
            }
            child.open[i] += 1;
            int completed = -1;
            if (child.open[i] == length_slots[i]) {
                child.open[i] = 0;
                completed = i;
            }
            settle(child, completed);
            actions[node.at] = i;
            dfs(child);
        }
        if (arrivals_pending) {
            Node child = node;
            child.accrued += slot_cost;
            child.at = node.at + 1;
            actions[node.at] = -1;
            dfs(child);
        }
        actions[node.at] = -1;
    };

    Node root;
    root.open.assign(n, 0);
    root.pair.assign(pairs, kNew);
    root.served.assign(q, false);
    // Requests whose sets are empty cannot occur (validation), so nobody
    // is served before the first slot.
    dfs(root);

    if (!have_witness) {
        throw Infeasible("no discrete schedule serves every request within the horizon");
    }

    DiscreteSchedule ds;
    ds.slot = slot;
    ds.horizon = horizon;
    ds.slots = best_actions;
    return {Rational(incumbent) * slot, ds};
}

// Exact minimum batch flow over one-processor schedules that assign whole
// grid slots to single parallel phases, for micro instances. Sequential
// phases need no processor, so a state is just (slot, remaining parallel
// work per job); the tail cost once all parallel work is done is closed
// form. Exhaustive with memoization; deterministic (lowest job index wins
// ties).
inline BatchScheduleSummary micro_opt_batch_schedule(const BatchInstance& bi,
                                                     long long budget = 4'000'000) {
    validate_batches(bi);

    Rational h = 0;
    for (const Batch& b : bi.batches) {
        h = rational_gcd(h, b.arrival);
        for (const SeqParJob& j : b.jobs) {
            h = rational_gcd(h, j.seq_work);
            h = rational_gcd(h, j.par_work);
        }
    }
    if (h.is_zero()) h = Rational(1);

    struct FlatJob {
        int batch;
        long long release; // arrival + seq_work, in slots
        long long par;     // parallel slots
    };
    std::vector<FlatJob> flat;
    std::vector<long long> batch_arrival, batch_maxseq;
    long long horizon = 0;
    long long total_par = 0;
    for (int b = 0; b < static_cast<int>(bi.batches.size()); ++b) {
        const Batch& batch = bi.batches[b];
        long long arrival = static_cast<long long>(exact_quotient(batch.arrival, h));
        long long maxseq = arrival;
        for (const SeqParJob& j : batch.jobs) {
            FlatJob fj;
            fj.batch = b;
            fj.release = arrival + static_cast<long long>(exact_quotient(j.seq_work, h));
            fj.par = static_cast<long long>(exact_quotient(j.par_work, h));
            maxseq = std::max(maxseq, fj.release);
            total_par += fj.par;
            if (fj.par > 0) flat.push_back(fj);
            horizon = std::max(horizon, fj.release);
        }
        batch_arrival.push_back(arrival);
        batch_maxseq.push_back(maxseq);
        horizon = std::max(horizon, arrival);
    }
    horizon += total_par;

    if (flat.size() > 12 || horizon > 255) {
        throw ScaleExceeded("batch micro optimum: instance too large");
    }
    for (const FlatJob& fj : flat) {
        if (fj.par > 15) throw ScaleExceeded("batch micro optimum: parallel work too long");
    }

    auto pack = [&](long long slot, const std::vector<int>& rem) {
        std::uint64_t key = static_cast<std::uint64_t>(slot);
        for (int r : rem) key = (key << 4) | static_cast<unsigned>(r);
        return key;
    };

    // Tail cost with no parallel work left: batches stay alive to the end
    // of their longest sequential phase.
    auto tail = [&](long long slot) {
        long long cost = 0;
        for (size_t b = 0; b < batch_arrival.size(); ++b) {
            cost += std::max<long long>(0, batch_maxseq[b] - std::max(slot, batch_arrival[b]));
        }
        return cost;
    };

    struct Entry {
        long long cost;
        int action;
    };
    std::unordered_map<std::uint64_t, Entry> memo;
    long long nodes = 0;

    std::function<long long(long long, std::vector<int>&)> solve =
        [&](long long slot, std::vector<int>& rem) -> long long {
        long long left = 0;
        for (int r : rem) left += r;
        if (left == 0) return tail(slot);
        if (slot >= horizon) throw Error("batch micro optimum ran past its horizon");
        if (++nodes > budget) throw ScaleExceeded("batch micro optimum: node budget");

        std::uint64_t key = pack(slot, rem);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second.cost;

        long long alive = 0;
        for (size_t b = 0; b < batch_arrival.size(); ++b) {
            if (batch_arrival[b] > slot) continue;
            bool open = batch_maxseq[b] > slot;
            for (size_t j = 0; j < flat.size() && !open; ++j) {
                open = flat[j].batch == static_cast<int>(b) && rem[j] > 0;
            }
            if (open) ++alive;
        }

        long long best = std::numeric_limits<long long>::max();
        int best_action = -1;
        for (size_t j = 0; j < flat.size(); ++j) {
            if (rem[j] == 0 || flat[j].release > slot) continue;
            rem[j] -= 1;
            long long value = alive + solve(slot + 1, rem);
            rem[j] += 1;
            if (value < best) {
                best = value;
                best_action = static_cast<int>(j);
            }
        }
        if (best_action < 0) { // nothing released yet: forced idle
            best = alive + solve(slot + 1, rem);
        }
        memo[key] = {best, best_action};
        return best;
    };

    std::vector<int> rem(flat.size());
    for (size_t j = 0; j < flat.size(); ++j) rem[j] = static_cast<int>(flat[j].par);
    solve(0, rem);

    // Replay the memoized decisions to read off completion slots.
    std::vector<long long> last_slot(flat.size(), -1);
    {
        long long slot = 0;
        long long left = total_par;
        while (left > 0) {
            auto it = memo.find(pack(slot, rem));
            if (it == memo.end()) throw Error("batch micro optimum lost its own path");
            int action = it->second.action;
            if (action >= 0) {
                rem[action] -= 1;
                --left;
                last_slot[action] = slot + 1;
            }
            ++slot;
        }
    }

    BatchScheduleSummary summary;
    summary.total_flow = 0;
    for (int b = 0; b < static_cast<int>(bi.batches.size()); ++b) {
        long long done = batch_maxseq[b];
        for (size_t j = 0; j < flat.size(); ++j) {
            if (flat[j].batch == b && last_slot[j] >= 0) done = std::max(done, last_slot[j]);
        }
        Rational completion = Rational(done) * h;
        summary.completion[bi.batches[b].id] = completion;
        summary.flow_of[bi.batches[b].id] = completion - bi.batches[b].arrival;
        summary.total_flow += completion - bi.batches[b].arrival;
    }
    return summary;
}

} // namespace bcast
