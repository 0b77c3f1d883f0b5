#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcast/instance.hpp"
#include "bcast/rational.hpp"

namespace bcast {

// One constant-rate span [begin, end). pair_rates carries the per
// (request, item) split when the producer knows it (the simulators always
// do); item_rates is the per-item aggregate and is authoritative for
// broadcast decomposition. Schedules without request attribution (oracle
// witnesses) leave pair_rates empty.
struct RateInterval {
    Rational begin;
    Rational end;
    std::map<std::pair<std::string, std::string>, Rational> pair_rates;
    std::map<std::string, Rational> item_rates;
};

struct RateSchedule {
    Rational speed;
    std::vector<RateInterval> intervals; // contiguous, strictly increasing
};

struct Broadcast {
    Rational begin;
    Rational end;
};

// Completed execution record: per-item broadcast intervals, per-request
// completion times, and the total flow. The horizon is the last event
// covered by the schedule; nothing is extrapolated past it.
struct BroadcastTrace {
    RateSchedule schedule;
    std::map<std::string, std::vector<Broadcast>> broadcasts;
    std::map<std::string, Rational> completions;
    Rational flow;
    Rational horizon;
};

// First broadcast of `item` whose begin time is >= t (inclusive), or
// nullopt when no such broadcast exists within the trace horizon.
inline std::optional<Broadcast> first_broadcast_after(const BroadcastTrace& trace,
                                                      const std::string& item,
                                                      const Rational& t) {
    auto it = trace.broadcasts.find(item);
    if (it == trace.broadcasts.end()) {
        throw ValidationError("unknown item id: " + item);
    }
    for (const Broadcast& b : it->second) {
        if (b.begin >= t) return b;
    }
    return std::nullopt;
}

// Completion time of the first broadcast of `item` starting at or after t.
inline std::optional<Rational> download_completion(const BroadcastTrace& trace,
                                                   const std::string& item,
                                                   const Rational& t) {
    auto b = first_broadcast_after(trace, item, t);
    if (!b) return std::nullopt;
    return b->end;
}

// Exact total flow, recomputed from the raw broadcast intervals. Throws
// UnservedRequest if some request has no completion within the horizon,
// and TraceMismatch if the recomputation disagrees with the stored values.
inline Rational flow_time(const BroadcastTrace& trace, const BroadcastInstance& inst) {
    Rational total = 0;
    for (const Request& req : inst.requests) {
        Rational completion = req.arrival;
        for (const std::string& item : req.items) {
            auto c = download_completion(trace, item, req.arrival);
            if (!c) {
                throw UnservedRequest("unserved request: " + req.id + " (item " + item + ")");
            }
            completion = max(completion, *c);
        }
        auto stored = trace.completions.find(req.id);
        if (stored == trace.completions.end() || stored->second != completion) {
            throw TraceMismatch("stored completion of " + req.id + " disagrees with intervals");
        }
        total += completion - req.arrival;
    }
    if (total != trace.flow) {
        throw TraceMismatch("stored flow " + trace.flow.str() + " disagrees with recomputed " + total.str());
    }
    return total;
}

// Integral of an item's aggregate rate over [from, to].
inline Rational integrate_item_rate(const RateSchedule& schedule, const std::string& item,
                                    const Rational& from, const Rational& to) {
    Rational total = 0;
    for (const RateInterval& iv : schedule.intervals) {
        Rational lo = max(iv.begin, from);
        Rational hi = min(iv.end, to);
        if (lo >= hi) continue;
        auto it = iv.item_rates.find(item);
        if (it != iv.item_rates.end()) {
            total += it->second * (hi - lo);
        }
    }
    return total;
}

// Integral of one (request, item) rate stream over [from, to].
inline Rational integrate_pair_rate(const RateSchedule& schedule, const std::string& request,
                                    const std::string& item, const Rational& from,
                                    const Rational& to) {
    Rational total = 0;
    auto key = std::make_pair(request, item);
    for (const RateInterval& iv : schedule.intervals) {
        Rational lo = max(iv.begin, from);
        Rational hi = min(iv.end, to);
        if (lo >= hi) continue;
        auto it = iv.pair_rates.find(key);
        if (it != iv.pair_rates.end()) {
            total += it->second * (hi - lo);
        }
    }
    return total;
}

} // namespace bcast
