#pragma once

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "bcast/instance.hpp"
#include "bcast/schedule.hpp"

namespace bcast {

using Json = nlohmann::ordered_json;

namespace detail {

inline void require_keys(const Json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ParseError(where + ": unknown field \"" + it.key() + "\"");
        }
    }
}

inline Rational rational_field(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
    const Json& v = obj.at(key);
    if (!v.is_string()) throw ParseError(where + ": field \"" + key + "\" must be a rational string");
    return Rational::parse_or_throw(v.get<std::string>());
}

inline std::string string_field(const Json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(where + ": missing field \"" + key + "\"");
    const Json& v = obj.at(key);
    if (!v.is_string()) throw ParseError(where + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

inline Rational rational_value(const Json& v, const std::string& where) {
    if (!v.is_string()) throw ParseError(where + ": expected a rational string");
    return Rational::parse_or_throw(v.get<std::string>());
}

} // namespace detail

inline Json instance_to_json(const BroadcastInstance& inst) {
    Json items = Json::array();
    for (const Item& item : inst.items) {
        items.push_back({{"id", item.id}, {"length", item.length.str()}});
    }
    Json requests = Json::array();
    for (const Request& req : inst.requests) {
        requests.push_back({{"id", req.id}, {"arrival", req.arrival.str()}, {"items", req.items}});
    }
    return Json{{"items", items}, {"requests", requests}};
}

inline BroadcastInstance instance_from_json(const Json& j) {
    detail::require_keys(j, {"items", "requests"}, "instance");
    if (!j.contains("items") || !j.contains("requests")) {
        throw ParseError("instance: missing \"items\" or \"requests\"");
    }
    BroadcastInstance inst;
    for (const Json& it : j.at("items")) {
        detail::require_keys(it, {"id", "length"}, "item");
        inst.items.push_back({detail::string_field(it, "id", "item"),
                              detail::rational_field(it, "length", "item")});
    }
    for (const Json& rq : j.at("requests")) {
        detail::require_keys(rq, {"id", "arrival", "items"}, "request");
        Request req;
        req.id = detail::string_field(rq, "id", "request");
        req.arrival = detail::rational_field(rq, "arrival", "request");
        if (!rq.contains("items") || !rq.at("items").is_array()) {
            throw ParseError("request " + req.id + ": \"items\" must be an array");
        }
        for (const Json& m : rq.at("items")) {
            if (!m.is_string()) throw ParseError("request " + req.id + ": item ids must be strings");
            req.items.push_back(m.get<std::string>());
        }
        inst.requests.push_back(std::move(req));
    }
    return inst;
}

// Trace format. Per-interval rate objects key entries either by
// "request:item" (attributed rates; item aggregates are derived as the
// per-item sums) or by a bare "item" id (aggregate-only schedules). The
// two forms may not be mixed for the same item within an interval.
inline Json trace_to_json(const BroadcastTrace& trace) {
    Json breakpoints = Json::array();
    Json rates = Json::array();
    const auto& intervals = trace.schedule.intervals;
    for (size_t k = 0; k < intervals.size(); ++k) {
        if (k == 0) breakpoints.push_back(intervals[k].begin.str());
        breakpoints.push_back(intervals[k].end.str());
        Json entry = Json::object();
        if (!intervals[k].pair_rates.empty()) {
            for (const auto& [key, rate] : intervals[k].pair_rates) {
                entry[key.first + ":" + key.second] = rate.str();
            }
        } else {
            for (const auto& [item, rate] : intervals[k].item_rates) {
                if (!rate.is_zero()) entry[item] = rate.str();
            }
        }
        rates.push_back(std::move(entry));
    }
    Json broadcasts = Json::object();
    for (const auto& [item, list] : trace.broadcasts) {
        Json arr = Json::array();
        for (const Broadcast& b : list) {
            arr.push_back(Json::array({b.begin.str(), b.end.str()}));
        }
        broadcasts[item] = std::move(arr);
    }
    Json completions = Json::object();
    for (const auto& [request, c] : trace.completions) {
        completions[request] = c.str();
    }
    return Json{{"speed", trace.schedule.speed.str()},
                {"breakpoints", breakpoints},
                {"rates", rates},
                {"broadcasts", broadcasts},
                {"completions", completions},
                {"flow", trace.flow.str()}};
}

inline BroadcastTrace trace_from_json(const Json& j) {
    detail::require_keys(j, {"speed", "breakpoints", "rates", "broadcasts", "completions", "flow"},
                         "trace");
    BroadcastTrace trace;
    trace.schedule.speed = detail::rational_field(j, "speed", "trace");
    std::vector<Rational> breakpoints;
    for (const Json& b : j.at("breakpoints")) {
        breakpoints.push_back(detail::rational_value(b, "breakpoints"));
    }
    const Json& rates = j.at("rates");
    if (!rates.is_array() || breakpoints.size() != rates.size() + 1) {
        throw ParseError("trace: breakpoints must be one longer than rates");
    }
    for (size_t k = 0; k < rates.size(); ++k) {
        if (breakpoints[k] >= breakpoints[k + 1]) {
            throw ParseError("trace: breakpoints must be strictly increasing");
        }
        RateInterval iv;
        iv.begin = breakpoints[k];
        iv.end = breakpoints[k + 1];
        std::set<std::string> bare;
        for (auto it = rates[k].begin(); it != rates[k].end(); ++it) {
            Rational rate = detail::rational_value(it.value(), "rates");
            auto colon = it.key().find(':');
            if (colon == std::string::npos) {
                iv.item_rates[it.key()] = rate;
                bare.insert(it.key());
            } else {
                iv.pair_rates[{it.key().substr(0, colon), it.key().substr(colon + 1)}] = rate;
            }
        }
        // Aggregates of attributed items are the per-item sums.
        for (const auto& [key, rate] : iv.pair_rates) {
            if (bare.count(key.second)) {
                throw ParseError("trace: mixed rate forms for item " + key.second);
            }
            iv.item_rates[key.second] += rate;
        }
        trace.schedule.intervals.push_back(std::move(iv));
    }
    for (auto it = j.at("broadcasts").begin(); it != j.at("broadcasts").end(); ++it) {
        std::vector<Broadcast> list;
        for (const Json& pair : it.value()) {
            if (!pair.is_array() || pair.size() != 2) {
                throw ParseError("trace: broadcast entries must be [begin, end] pairs");
            }
            list.push_back({detail::rational_value(pair[0], "broadcast"),
                            detail::rational_value(pair[1], "broadcast")});
        }
        trace.broadcasts[it.key()] = std::move(list);
    }
    for (auto it = j.at("completions").begin(); it != j.at("completions").end(); ++it) {
        trace.completions[it.key()] = detail::rational_value(it.value(), "completion");
    }
    trace.flow = detail::rational_field(j, "flow", "trace");
    trace.horizon = breakpoints.empty() ? Rational(0) : breakpoints.back();
    return trace;
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

} // namespace bcast
