#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bcast/rational.hpp"

namespace bcast {

struct Item {
    std::string id;
    Rational length; // broadcast units, > 0
};

struct Request {
    std::string id;
    Rational arrival;               // >= 0
    std::vector<std::string> items; // non-empty, no duplicates
};

struct BroadcastInstance {
    std::vector<Item> items;
    std::vector<Request> requests;
};

struct ValidationIssue {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

// Structural checks: positive lengths, unique ids, non-empty request sets,
// no dangling item references, non-negative arrivals. Ids may not contain
// ':' because trace files key rate entries by "request:item".
inline ValidationReport validate_instance(const BroadcastInstance& inst) {
    ValidationReport report;
    auto issue = [&](std::string code, std::string message) {
        report.issues.push_back({std::move(code), std::move(message)});
    };

    std::set<std::string> item_ids;
    for (const Item& item : inst.items) {
        if (item.id.empty()) issue("empty-id", "item with empty id");
        if (item.id.find(':') != std::string::npos) {
            issue("bad-id", "item id contains ':': " + item.id);
        }
        if (!item_ids.insert(item.id).second) {
            issue("duplicate-id", "duplicate item id: " + item.id);
        }
        if (item.length.sign() <= 0) {
            issue("non-positive-length", "item " + item.id + " has length " + item.length.str());
        }
    }

    std::set<std::string> request_ids;
    for (const Request& req : inst.requests) {
        if (req.id.empty()) issue("empty-id", "request with empty id");
        if (req.id.find(':') != std::string::npos) {
            issue("bad-id", "request id contains ':': " + req.id);
        }
        if (!request_ids.insert(req.id).second) {
            issue("duplicate-id", "duplicate request id: " + req.id);
        }
        if (req.arrival.sign() < 0) {
            issue("negative-arrival", "request " + req.id + " arrives at " + req.arrival.str());
        }
        if (req.items.empty()) {
            issue("empty-set", "request " + req.id + " asks for no items");
        }
        std::set<std::string> seen;
        for (const std::string& id : req.items) {
            if (!item_ids.count(id)) {
                issue("dangling-reference", "request " + req.id + " references unknown item " + id);
            }
            if (!seen.insert(id).second) {
                issue("duplicate-member", "request " + req.id + " lists item " + id + " twice");
            }
        }
    }
    return report;
}

// Index view shared by the simulators. Item order in the instance defines
// the index order used by every "lowest-indexed" tie-break.
struct IndexedInstance {
    const BroadcastInstance* inst = nullptr;
    std::map<std::string, int> item_index;
    std::map<std::string, int> request_index;
    std::vector<std::vector<int>> request_items; // per request, instance order

    explicit IndexedInstance(const BroadcastInstance& instance) : inst(&instance) {
        ValidationReport report = validate_instance(instance);
        if (!report.ok()) {
            throw ValidationError("invalid instance: " + report.issues.front().message);
        }
        for (int i = 0; i < static_cast<int>(instance.items.size()); ++i) {
            item_index[instance.items[i].id] = i;
        }
        for (int r = 0; r < static_cast<int>(instance.requests.size()); ++r) {
            request_index[instance.requests[r].id] = r;
            std::vector<int> members;
            for (const std::string& id : instance.requests[r].items) {
                members.push_back(item_index.at(id));
            }
            std::sort(members.begin(), members.end());
            request_items.push_back(std::move(members));
        }
    }

    int items() const { return static_cast<int>(inst->items.size()); }
    int requests() const { return static_cast<int>(inst->requests.size()); }
    const Rational& length(int i) const { return inst->items[i].length; }
    const Rational& arrival(int r) const { return inst->requests[r].arrival; }
    const std::string& item_id(int i) const { return inst->items[i].id; }
    const std::string& request_id(int r) const { return inst->requests[r].id; }
};

} // namespace bcast
