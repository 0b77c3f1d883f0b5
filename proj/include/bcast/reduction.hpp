#pragma once

#include <map>
#include <string>
#include <vector>

#include "bcast/instance.hpp"
#include "bcast/jobs.hpp"
#include "bcast/oracle.hpp"
#include "bcast/schedule.hpp"

namespace bcast {

// One seq-par job per (request, item) pair. The sequential phase runs from
// the request's arrival to whichever comes first of the item download's
// completion in the algorithm trace and the start of its qualifying
// broadcast in the reference trace; the parallel work is the exact area
// the pair received in the algorithm trace between those two events.
struct ReductionJob {
    std::string request;
    std::string item;
    Rational seq_work;
    Rational par_work;
    bool sticky = false;
    Rational release;       // completion of the serving broadcast in the algorithm trace
    Rational reference_begin; // B^O(item, arrival)
};

// Requests for one item, split by the reference broadcast that serves
// them. minus/plus hold the positive-parallel members whose serving
// algorithm broadcast starts at-or-before / after this broadcast's begin.
struct ItemClassReport {
    int k = 0;
    Rational begin;
    Rational end;
    std::vector<std::string> members;
    std::vector<std::string> minus;
    std::vector<std::string> plus;
    Rational w_minus;
    Rational w_plus;
    Rational capacity_bound; // 2 * item length
};

struct ReductionOutput {
    BatchInstance batches; // one batch per request, processors = algorithm speed
    std::map<std::string, ReductionJob> jobs; // keyed "request:item"
    std::map<std::string, std::vector<ItemClassReport>> classes; // per item
    BroadcastTrace e_trace; // kept for the replay policy
    Rational e_speed;
};

// Builds the batch instance and the per-item class partition from a
// broadcast instance, the algorithm trace at speed s, and a unit-speed
// reference trace. Both traces are re-verified from their raw rates.
inline ReductionOutput build_batch_instance(const BroadcastInstance& inst,
                                            const BroadcastTrace& e_trace,
                                            const BroadcastTrace& o_trace) {
    auto e_check = verify_schedule(e_trace.schedule, inst, e_trace.schedule.speed);
    if (!e_check.ok()) {
        throw TraceMismatch("algorithm trace fails verification: " + e_check.violations.front());
    }
    auto o_check = verify_schedule(o_trace.schedule, inst, o_trace.schedule.speed);
    if (!o_check.ok()) {
        throw TraceMismatch("reference trace fails verification: " + o_check.violations.front());
    }
    for (const Request& req : inst.requests) {
        if (!o_trace.completions.count(req.id)) {
            throw TraceMismatch("reference trace never serves request " + req.id);
        }
        if (!e_trace.completions.count(req.id)) {
            throw TraceMismatch("algorithm trace never serves request " + req.id);
        }
    }

    ReductionOutput out;
    out.e_trace = e_trace;
    out.e_speed = e_trace.schedule.speed;
    out.batches.processors = out.e_speed;

    std::map<std::string, Rational> lengths;
    for (const Item& item : inst.items) lengths[item.id] = item.length;

    for (const Request& req : inst.requests) {
        Batch batch;
        batch.id = req.id;
        batch.arrival = req.arrival;
        for (const std::string& item : req.items) {
            auto serving = first_broadcast_after(e_trace, item, req.arrival);
            auto reference = first_broadcast_after(o_trace, item, req.arrival);
            if (!serving || !reference) {
                throw TraceMismatch("no serving broadcast for " + req.id + ":" + item);
            }
            ReductionJob job;
            job.request = req.id;
            job.item = item;
            job.release = serving->end;
            job.reference_begin = reference->begin;
            Rational cutoff = min(serving->end, reference->begin);
            job.seq_work = cutoff - req.arrival;
            if (serving->end <= reference->begin) {
                job.par_work = 0;
                job.sticky = false;
            } else {
                job.par_work = integrate_pair_rate(e_trace.schedule, req.id, item,
                                                   reference->begin, serving->end);
                job.sticky = true;
            }
            batch.jobs.push_back({item, job.seq_work, job.par_work, job.sticky});
            out.jobs[job_key(req.id, item)] = std::move(job);
        }
        out.batches.batches.push_back(std::move(batch));
    }

    // Class partition per item: request S_j lands in class k when the
    // k-th reference broadcast is the first to begin at or after its
    // arrival. Positive-parallel members split by whether their serving
    // algorithm broadcast begins at-or-before or after the class begin.
    for (const Item& item : inst.items) {
        const auto& reference_broadcasts = o_trace.broadcasts.at(item.id);
        std::vector<ItemClassReport> reports;
        for (size_t k = 0; k < reference_broadcasts.size(); ++k) {
            ItemClassReport report;
            report.k = static_cast<int>(k) + 1;
            report.begin = reference_broadcasts[k].begin;
            report.end = reference_broadcasts[k].end;
            report.capacity_bound = item.length * Rational(2);
            reports.push_back(std::move(report));
        }
        for (const Request& req : inst.requests) {
            bool wants = false;
            for (const std::string& member : req.items) wants = wants || member == item.id;
            if (!wants) continue;
            size_t k = 0;
            while (k < reference_broadcasts.size() && reference_broadcasts[k].begin < req.arrival) {
                ++k;
            }
            if (k == reference_broadcasts.size()) {
                throw TraceMismatch("request " + req.id + " falls in no class for " + item.id);
            }
            reports[k].members.push_back(req.id);
            const ReductionJob& job = out.jobs.at(job_key(req.id, item.id));
            if (job.par_work.sign() > 0) {
                auto serving = first_broadcast_after(e_trace, item.id, req.arrival);
                if (serving->begin <= reports[k].begin) {
                    reports[k].minus.push_back(req.id);
                    reports[k].w_minus += job.par_work;
                } else {
                    reports[k].plus.push_back(req.id);
                    reports[k].w_plus += job.par_work;
                }
            }
        }
        out.classes[item.id] = std::move(reports);
    }
    return out;
}

inline std::map<std::string, Rational> sticky_releases(const ReductionOutput& out) {
    std::map<std::string, Rational> releases;
    for (const auto& [key, job] : out.jobs) {
        if (job.sticky) releases[key] = job.release;
    }
    return releases;
}

// Inner policy that replays, for each batch share, the per-(request, item)
// split the broadcast algorithm used at the same instant, rescaled to the
// share actually received. Fully active by construction; querying a time
// outside the recorded stream throws.
inline JobPolicy mirror_policy(const ReductionOutput& out) {
    // The trace is copied into the closure so the policy owns its data.
    BroadcastTrace trace = out.e_trace;
    std::vector<Rational> breakpoints;
    for (const auto& iv : trace.schedule.intervals) {
        breakpoints.push_back(iv.begin);
        breakpoints.push_back(iv.end);
    }
    auto fn = [trace](const Batch& batch, const std::vector<std::string>& alive_jobs,
                      const Rational& share, const Rational& now) {
        const RateInterval* current = nullptr;
        for (const auto& iv : trace.schedule.intervals) {
            if (iv.begin <= now && now < iv.end) {
                current = &iv;
                break;
            }
        }
        if (!current) {
            throw Error("mirror policy queried outside the recorded horizon at t = " + now.str());
        }
        std::map<std::string, Rational> recorded;
        Rational total = 0;
        for (const std::string& job : alive_jobs) {
            auto it = current->pair_rates.find({batch.id, job});
            if (it != current->pair_rates.end()) {
                recorded[job] = it->second;
                total += it->second;
            }
        }
        if (total.is_zero()) {
            throw Error("mirror policy has no recorded rates for batch " + batch.id + " at t = " +
                        now.str());
        }
        std::map<std::string, Rational> rates;
        for (const auto& [job, rate] : recorded) rates[job] = share * rate / total;
        return rates;
    };
    return JobPolicy::custom_split(fn, std::move(breakpoints));
}

// The two-speed constructive schedule: within each reference broadcast's
// window, the parallel works of that class are packed earliest-arrival
// first into twice the reference rate profile. Asserts the per-class
// capacity bound W- + W+ <= 2 * length before packing, and that every
// batch completes no later than its request does in the reference trace.
inline JobTrace construct_upsilon2(const ReductionOutput& out, const BroadcastTrace& o_trace) {
    struct Atom {
        Rational begin;
        Rational end;
        std::string key;
        Rational rate;
    };
    std::vector<Atom> atoms;

    std::map<std::string, Rational> arrivals;
    std::map<std::string, Rational> completion; // per batch
    for (const Batch& batch : out.batches.batches) {
        arrivals[batch.id] = batch.arrival;
        completion[batch.id] = batch.arrival;
    }

    std::map<std::string, Rational> job_completion;

    for (const auto& [item, reports] : out.classes) {
        for (const ItemClassReport& report : reports) {
            if (report.w_minus + report.w_plus > report.capacity_bound) {
                throw ConstructionViolated("class " + std::to_string(report.k) + " of " + item +
                                           " exceeds twice the item length");
            }
            // Members in arrival order, ties by id.
            std::vector<std::string> order;
            for (const std::string& req : report.minus) order.push_back(req);
            for (const std::string& req : report.plus) order.push_back(req);
            std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
                if (arrivals.at(a) != arrivals.at(b)) return arrivals.at(a) < arrivals.at(b);
                return a < b;
            });

            size_t member = 0;
            Rational left = member < order.size()
                                ? out.jobs.at(job_key(order[member], item)).par_work
                                : Rational(0);
            for (const RateInterval& iv : o_trace.schedule.intervals) {
                if (member >= order.size()) break;
                Rational lo = max(iv.begin, report.begin);
                Rational hi = min(iv.end, report.end);
                if (lo >= hi) continue;
                auto rate_it = iv.item_rates.find(item);
                if (rate_it == iv.item_rates.end() || rate_it->second.is_zero()) continue;
                Rational rate = rate_it->second * Rational(2);
                Rational at = lo;
                while (member < order.size() && at < hi) {
                    Rational avail = rate * (hi - at);
                    if (avail <= left) {
                        atoms.push_back({at, hi, job_key(order[member], item), rate});
                        left -= avail;
                        at = hi;
                        if (left.is_zero() && !avail.is_zero()) {
                            job_completion[job_key(order[member], item)] = hi;
                            ++member;
                            left = member < order.size()
                                       ? out.jobs.at(job_key(order[member], item)).par_work
                                       : Rational(0);
                        }
                    } else {
                        Rational until = at + left / rate;
                        atoms.push_back({at, until, job_key(order[member], item), rate});
                        job_completion[job_key(order[member], item)] = until;
                        at = until;
                        ++member;
                        left = member < order.size()
                                   ? out.jobs.at(job_key(order[member], item)).par_work
                                   : Rational(0);
                    }
                }
            }
            if (member < order.size()) {
                throw ConstructionViolated("class " + std::to_string(report.k) + " of " + item +
                                           " does not fit the reference window");
            }
        }
    }

    // Zero-parallel jobs complete at the end of their sequential phase,
    // positive ones at their packed completion.
    JobTrace trace;
    trace.processors = Rational(2);
    trace.flow = 0;
    trace.horizon = 0;
    for (const Batch& batch : out.batches.batches) {
        for (const SeqParJob& job : batch.jobs) {
            std::string key = job_key(batch.id, job.id);
            Rational done;
            if (job.par_work.sign() > 0) {
                auto it = job_completion.find(key);
                if (it == job_completion.end()) {
                    throw ConstructionViolated("job " + key + " was never packed");
                }
                done = it->second;
            } else {
                done = batch.arrival + job.seq_work;
            }
            trace.job_completion[key] = done;
            completion[batch.id] = max(completion[batch.id], done);
        }
        Rational reference_completion = o_trace.completions.at(batch.id);
        if (completion[batch.id] > reference_completion) {
            throw ConstructionViolated("batch " + batch.id + " completes at " +
                                       completion[batch.id].str() + ", after the reference " +
                                       reference_completion.str());
        }
        trace.batch_completion[batch.id] = completion[batch.id];
        trace.flow += completion[batch.id] - batch.arrival;
        trace.horizon = max(trace.horizon, completion[batch.id]);
    }

    // Merge atoms into contiguous intervals and check the global rate.
    std::vector<Rational> cuts;
    for (const Atom& atom : atoms) {
        cuts.push_back(atom.begin);
        cuts.push_back(atom.end);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        JobInterval iv;
        iv.begin = cuts[k];
        iv.end = cuts[k + 1];
        Rational total = 0;
        for (const Atom& atom : atoms) {
            if (atom.begin <= iv.begin && iv.end <= atom.end) {
                iv.alloc[atom.key] += atom.rate;
                iv.batch_alloc[atom.key.substr(0, atom.key.find(':'))] += atom.rate;
                total += atom.rate;
            }
        }
        if (total > Rational(2)) {
            throw ConstructionViolated("aggregate rate " + total.str() + " exceeds 2 at t = " +
                                       iv.begin.str());
        }
        if (!iv.alloc.empty()) trace.intervals.push_back(std::move(iv));
    }
    return trace;
}

} // namespace bcast
