#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bcast/rational.hpp"

namespace bcast {

// A job with a sequential phase that progresses at unit rate no matter how
// many processors it holds, followed by a parallel phase that progresses
// at its allocation rate. sticky_alive keeps the job alive past the end of
// its parallel work until an externally supplied release time; only the
// broadcast reduction sets it.
struct SeqParJob {
    std::string id;
    Rational seq_work;
    Rational par_work;
    bool sticky_alive = false;
};

struct Batch {
    std::string id;
    Rational arrival;
    std::vector<SeqParJob> jobs; // non-empty; order defines the MinIdx index
};

struct BatchInstance {
    Rational processors;
    std::vector<Batch> batches;
};

struct ArrivedJob {
    Rational arrival;
    SeqParJob job;
};

inline std::string job_key(const std::string& batch, const std::string& job) {
    return batch + ":" + job;
}

inline void validate_batches(const BatchInstance& bi) {
    if (bi.processors.sign() <= 0) throw ValidationError("processors must be positive");
    std::set<std::string> batch_ids;
    for (const Batch& b : bi.batches) {
        if (b.id.empty() || b.id.find(':') != std::string::npos) {
            throw ValidationError("bad batch id: " + b.id);
        }
        if (!batch_ids.insert(b.id).second) throw ValidationError("duplicate batch id: " + b.id);
        if (b.arrival.sign() < 0) throw ValidationError("batch " + b.id + " arrives before 0");
        if (b.jobs.empty()) throw ValidationError("batch " + b.id + " is empty");
        std::set<std::string> job_ids;
        for (const SeqParJob& j : b.jobs) {
            if (j.id.empty() || j.id.find(':') != std::string::npos) {
                throw ValidationError("bad job id in batch " + b.id);
            }
            if (!job_ids.insert(j.id).second) {
                throw ValidationError("duplicate job id " + j.id + " in batch " + b.id);
            }
            if (j.seq_work.sign() < 0 || j.par_work.sign() < 0) {
                throw ValidationError("negative work in job " + job_key(b.id, j.id));
            }
        }
    }
}

struct JobInterval {
    Rational begin;
    Rational end;
    std::map<std::string, Rational> alloc;       // "batch:job" -> rate
    std::map<std::string, Rational> batch_alloc; // batch -> summed rate
};

struct JobTrace {
    Rational processors;
    std::vector<JobInterval> intervals;
    std::map<std::string, Rational> job_completion;   // "batch:job"
    std::map<std::string, Rational> batch_completion; // batch
    Rational flow;                                    // sum of batch flows
    Rational horizon;
};

// Inner policy of Equi-over-batches: splits a batch's processor share over
// that batch's alive jobs. Must be fully active: the whole share is
// returned, spread over alive jobs (allocations to jobs still in their
// sequential phase are legal and wasted). `breakpoints` lists extra times
// at which the split must be recomputed (used by replay policies).
struct JobPolicy {
    enum class Kind { EquiJobs, MinIdx, Custom };
    using SplitFn = std::function<std::map<std::string, Rational>(
        const Batch&, const std::vector<std::string>&, const Rational&, const Rational&)>;

    Kind kind = Kind::EquiJobs;
    SplitFn custom;
    std::vector<Rational> breakpoints;

    static JobPolicy equi_jobs() { return {Kind::EquiJobs, nullptr, {}}; }
    static JobPolicy min_idx() { return {Kind::MinIdx, nullptr, {}}; }
    static JobPolicy custom_split(SplitFn fn, std::vector<Rational> breakpoints = {}) {
        return {Kind::Custom, std::move(fn), std::move(breakpoints)};
    }

    std::map<std::string, Rational> split(const Batch& batch,
                                          const std::vector<std::string>& alive_jobs,
                                          const Rational& share, const Rational& now) const {
        std::map<std::string, Rational> rates;
        switch (kind) {
        case Kind::EquiJobs: {
            Rational each = share / Rational(static_cast<long long>(alive_jobs.size()));
            for (const std::string& id : alive_jobs) rates[id] = each;
            break;
        }
        case Kind::MinIdx:
            rates[alive_jobs.front()] = share;
            break;
        case Kind::Custom:
            rates = custom(batch, alive_jobs, share, now);
            break;
        }
        Rational sum = 0;
        for (const auto& [id, rate] : rates) {
            if (rate.sign() < 0) {
                throw PolicyContractViolation("negative rate for job " + id);
            }
            bool known = false;
            for (const std::string& alive : alive_jobs) known = known || alive == id;
            if (!known) {
                throw PolicyContractViolation("rate for job not alive in batch " + batch.id);
            }
            sum += rate;
        }
        if (sum != share) {
            throw PolicyContractViolation("split for batch " + batch.id + " sums to " + sum.str() +
                                          ", share is " + share.str());
        }
        return rates;
    }
};

namespace detail {

struct JobState {
    int batch;
    int index_in_batch;
    Rational arrival;
    Rational seq_end;  // arrival + seq_work
    Rational par_left; // parallel work still to consume
    bool sticky = false;
    std::optional<Rational> release; // sticky completion gate
    bool completed = false;
    Rational completion;
};

} // namespace detail

// Equi over alive batches with the given inner policy inside each batch.
// Sequential phases advance at unit rate regardless of allocation;
// parallel work is consumed at the allocated rate once the job's own
// sequential phase has ended. sticky_releases (keyed "batch:job") gate the
// completion of sticky jobs.
inline JobTrace simulate_equi_compose_a(
    const BatchInstance& bi, const JobPolicy& policy,
    const std::map<std::string, Rational>* sticky_releases = nullptr) {
    validate_batches(bi);
    const Rational& p = bi.processors;

    std::vector<detail::JobState> jobs;
    std::vector<std::vector<int>> of_batch(bi.batches.size());
    for (int b = 0; b < static_cast<int>(bi.batches.size()); ++b) {
        for (int k = 0; k < static_cast<int>(bi.batches[b].jobs.size()); ++k) {
            const SeqParJob& j = bi.batches[b].jobs[k];
            detail::JobState js;
            js.batch = b;
            js.index_in_batch = k;
            js.arrival = bi.batches[b].arrival;
            js.seq_end = js.arrival + j.seq_work;
            js.par_left = j.par_work;
            js.sticky = j.sticky_alive;
            if (js.sticky) {
                std::string key = job_key(bi.batches[b].id, j.id);
                if (!sticky_releases || !sticky_releases->count(key)) {
                    throw ValidationError("sticky job " + key + " has no release time");
                }
                js.release = sticky_releases->at(key);
            }
            of_batch[b].push_back(static_cast<int>(jobs.size()));
            jobs.push_back(std::move(js));
        }
    }

    JobTrace trace;
    trace.processors = p;
    trace.flow = 0;

    Rational now = 0;
    size_t next_breakpoint = 0;
    std::vector<Rational> breakpoints = policy.breakpoints;
    std::sort(breakpoints.begin(), breakpoints.end());

    auto job_alive = [&](const detail::JobState& js) { return js.arrival <= now && !js.completed; };
    auto batch_alive = [&](int b) {
        if (bi.batches[b].arrival > now) return false;
        for (int j : of_batch[b]) {
            if (!jobs[j].completed) return true;
        }
        return false;
    };

    // Completion sweep at the current instant: a job is done once its
    // sequential phase has ended, its parallel work is exhausted, and any
    // sticky release has passed.
    auto settle_completions = [&]() {
        for (auto& js : jobs) {
            if (js.completed || js.arrival > now) continue;
            if (js.seq_end > now || js.par_left.sign() > 0) continue;
            if (js.release && *js.release > now) continue;
            js.completed = true;
            js.completion = now;
            int b = js.batch;
            bool done = true;
            for (int j : of_batch[b]) done = done && jobs[j].completed;
            if (done) {
                Rational t = now;
                for (int j : of_batch[b]) t = max(t, jobs[j].completion);
                trace.batch_completion[bi.batches[b].id] = t;
                trace.flow += t - bi.batches[b].arrival;
            }
        }
    };

    settle_completions(); // zero-work batches arriving at t = 0

    while (true) {
        bool any_alive = false;
        for (int b = 0; b < static_cast<int>(bi.batches.size()); ++b) {
            any_alive = any_alive || batch_alive(b);
        }
        std::optional<Rational> pending;
        for (const Batch& b : bi.batches) {
            if (b.arrival > now && (!pending || b.arrival < *pending)) pending = b.arrival;
        }
        if (!any_alive && !pending) break;

        std::map<std::string, Rational> alloc; // full keys
        std::vector<Rational> job_rate(jobs.size(), Rational(0));
        if (any_alive) {
            int alive_batches = 0;
            for (int b = 0; b < static_cast<int>(bi.batches.size()); ++b) {
                if (batch_alive(b)) ++alive_batches;
            }
            Rational share = p / Rational(alive_batches);
            for (int b = 0; b < static_cast<int>(bi.batches.size()); ++b) {
                if (!batch_alive(b)) continue;
                std::vector<std::string> alive_ids;
                std::vector<int> alive_idx;
                for (int j : of_batch[b]) {
                    if (job_alive(jobs[j])) {
                        alive_ids.push_back(bi.batches[b].jobs[jobs[j].index_in_batch].id);
                        alive_idx.push_back(j);
                    }
                }
                auto split = policy.split(bi.batches[b], alive_ids, share, now);
                for (size_t k = 0; k < alive_ids.size(); ++k) {
                    auto it = split.find(alive_ids[k]);
                    if (it == split.end() || it->second.is_zero()) continue;
                    alloc[job_key(bi.batches[b].id, alive_ids[k])] = it->second;
                    job_rate[alive_idx[k]] = it->second;
                }
            }
        }

        // Next event: arrival, sequential end, parallel exhaustion,
        // sticky release, or a policy breakpoint.
        std::optional<Rational> t = pending;
        auto consider = [&](const Rational& c) {
            if (c > now && (!t || c < *t)) t = c;
        };
        for (const auto& js : jobs) {
            if (js.completed || js.arrival > now) continue;
            if (js.seq_end > now) consider(js.seq_end);
            if (js.release && *js.release > now) consider(*js.release);
        }
        for (size_t j = 0; j < jobs.size(); ++j) {
            const auto& js = jobs[j];
            if (js.completed || js.arrival > now) continue;
            if (js.seq_end <= now && js.par_left.sign() > 0 && job_rate[j].sign() > 0) {
                consider(now + js.par_left / job_rate[j]);
            }
        }
        while (next_breakpoint < breakpoints.size() && breakpoints[next_breakpoint] <= now) {
            ++next_breakpoint;
        }
        if (next_breakpoint < breakpoints.size()) consider(breakpoints[next_breakpoint]);

        if (!t) {
            throw Error("batch simulation stalled at t = " + now.str());
        }

        JobInterval interval;
        interval.begin = now;
        interval.end = *t;
        interval.alloc = alloc;
        for (const auto& [key, rate] : alloc) {
            interval.batch_alloc[key.substr(0, key.find(':'))] += rate;
        }
        trace.intervals.push_back(interval);

        // Consume parallel work; the sequential part of a straddled
        // interval cannot occur because seq ends are events.
        for (size_t j = 0; j < jobs.size(); ++j) {
            auto& js = jobs[j];
            if (js.completed || js.arrival > now || job_rate[j].is_zero()) continue;
            if (js.seq_end <= now) {
                js.par_left -= job_rate[j] * (*t - now);
                if (js.par_left.sign() < 0) throw Error("parallel work went negative");
            }
        }
        now = *t;
        settle_completions();
    }

    for (const auto& js : jobs) {
        trace.job_completion[job_key(bi.batches[js.batch].id,
                                     bi.batches[js.batch].jobs[js.index_in_batch].id)] =
            js.completion;
    }
    trace.horizon = now;
    return trace;
}

// Equi on independent jobs: every uncompleted arrived job receives an
// equal processor share. Realized as Equi-over-batches with singleton
// batches, which is the same algorithm.
inline JobTrace simulate_equi(const std::vector<ArrivedJob>& jobs, const Rational& p) {
    BatchInstance bi;
    bi.processors = p;
    for (const ArrivedJob& aj : jobs) {
        Batch b;
        b.id = aj.job.id;
        b.arrival = aj.arrival;
        b.jobs.push_back(aj.job);
        bi.batches.push_back(std::move(b));
    }
    return simulate_equi_compose_a(bi, JobPolicy::min_idx());
}

// J': one job per batch. The sequential work is the batch's longest
// sequential phase; the parallel work is the exact integral of the batch's
// allocation from the end of that phase to the batch's completion in the
// supplied trace.
inline std::vector<ArrivedJob> build_jprime(const BatchInstance& bi, const JobTrace& trace) {
    validate_batches(bi);
    std::vector<ArrivedJob> out;
    for (const Batch& b : bi.batches) {
        auto done = trace.batch_completion.find(b.id);
        if (done == trace.batch_completion.end()) {
            throw TraceMismatch("trace has no completion for batch " + b.id);
        }
        Rational seq = 0;
        for (const SeqParJob& j : b.jobs) seq = max(seq, j.seq_work);
        Rational from = b.arrival + seq;
        Rational par = 0;
        for (const JobInterval& iv : trace.intervals) {
            auto it = iv.batch_alloc.find(b.id);
            if (it == iv.batch_alloc.end()) continue;
            Rational lo = max(iv.begin, from);
            Rational hi = min(iv.end, done->second);
            if (lo < hi) par += it->second * (hi - lo);
        }
        out.push_back({b.arrival, {b.id, seq, par, false}});
    }
    return out;
}

// J'': trace-independent per-batch worst case, with the whole parallel
// load behind the longest sequential phase.
inline std::vector<ArrivedJob> build_jdoubleprime(const BatchInstance& bi) {
    validate_batches(bi);
    std::vector<ArrivedJob> out;
    for (const Batch& b : bi.batches) {
        Rational seq = 0;
        Rational par = 0;
        for (const SeqParJob& j : b.jobs) {
            seq = max(seq, j.seq_work);
            par += j.par_work;
        }
        out.push_back({b.arrival, {b.id, seq, par, false}});
    }
    return out;
}

struct FeasibilityResult {
    bool feasible = true;
    std::string violating_job;
    Rational deficit;
};

// Transfers an allocation history onto a job list: feasible when, reusing
// the history, every job's parallel work is covered by the allocation it
// received after its own sequential phase ends. Jobs are matched to the
// trace's batch-level allocation by id.
inline FeasibilityResult feasible_for(const JobTrace& trace, const std::vector<ArrivedJob>& jobs) {
    for (const ArrivedJob& aj : jobs) {
        Rational from = aj.arrival + aj.job.seq_work;
        Rational covered = 0;
        bool seen = false;
        for (const JobInterval& iv : trace.intervals) {
            auto it = iv.batch_alloc.find(aj.job.id);
            if (it == iv.batch_alloc.end()) continue;
            seen = true;
            Rational lo = max(iv.begin, from);
            if (lo < iv.end) covered += it->second * (iv.end - lo);
        }
        if (!seen && aj.job.par_work.sign() > 0 && covered < aj.job.par_work) {
            throw TraceMismatch("trace has no allocation stream for job " + aj.job.id);
        }
        if (covered < aj.job.par_work) {
            return {false, aj.job.id, aj.job.par_work - covered};
        }
    }
    return {};
}

// Per-batch summary of a feasible one-processor batch schedule.
struct BatchScheduleSummary {
    std::map<std::string, Rational> completion;
    std::map<std::string, Rational> flow_of;
    Rational total_flow;
};

// Packs each J'' job's parallel phase into the window
// [t_j, t_j + f_j/delta] on 1+delta processors, processing batches in
// non-increasing arrival order and always allocating the maximal
// admissible rate, earliest first. Succeeds whenever the summary comes
// from a feasible one-processor schedule; failure throws.
inline JobTrace construct_delayed_schedule(const std::vector<ArrivedJob>& jdp,
                                           const BatchScheduleSummary& summary,
                                           const Rational& delta) {
    if (delta.sign() <= 0) throw ValidationError("delta must be positive");
    Rational capacity = Rational(1) + delta;

    struct Piece {
        Rational begin;
        Rational end;
        Rational used;
        std::map<std::string, Rational> alloc;
    };
    std::vector<Piece> pieces;

    auto split_at = [&](const Rational& x) {
        for (size_t k = 0; k < pieces.size(); ++k) {
            if (pieces[k].begin < x && x < pieces[k].end) {
                Piece right = pieces[k];
                right.begin = x;
                pieces[k].end = x;
                pieces.insert(pieces.begin() + static_cast<long>(k) + 1, right);
                return;
            }
        }
    };

    std::vector<const ArrivedJob*> order;
    for (const ArrivedJob& aj : jdp) order.push_back(&aj);
    std::stable_sort(order.begin(), order.end(), [](const ArrivedJob* a, const ArrivedJob* b) {
        return a->arrival > b->arrival;
    });

    JobTrace trace;
    trace.processors = capacity;
    trace.flow = 0;
    trace.horizon = 0;

    // Lay out the union of all windows as idle pieces first.
    {
        std::vector<Rational> cuts;
        for (const ArrivedJob& aj : jdp) {
            auto t = summary.completion.find(aj.job.id);
            auto f = summary.flow_of.find(aj.job.id);
            if (t == summary.completion.end() || f == summary.flow_of.end()) {
                throw TraceMismatch("summary is missing batch " + aj.job.id);
            }
            cuts.push_back(t->second);
            cuts.push_back(t->second + f->second / delta);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t k = 0; k + 1 < cuts.size(); ++k) {
            pieces.push_back({cuts[k], cuts[k + 1], Rational(0), {}});
        }
    }

    for (const ArrivedJob* aj : order) {
        Rational t = summary.completion.at(aj->job.id);
        Rational f = summary.flow_of.at(aj->job.id);
        Rational window_end = t + f / delta;
        Rational seq_end = aj->arrival + aj->job.seq_work;
        if (seq_end > t) {
            throw ConstructionViolated("batch " + aj->job.id +
                                       " completes before its sequential phase in the summary");
        }
        Rational left = aj->job.par_work;
        Rational finish = seq_end;
        for (size_t k = 0; k < pieces.size() && left.sign() > 0; ++k) {
            if (pieces[k].end <= t || pieces[k].begin >= window_end) continue;
            Rational avail = capacity - pieces[k].used;
            if (avail.sign() <= 0) continue;
            Rational width = pieces[k].end - pieces[k].begin;
            if (avail * width <= left) {
                pieces[k].used = capacity;
                pieces[k].alloc[aj->job.id] += avail;
                left -= avail * width;
                finish = pieces[k].end;
            } else {
                Rational need = left / avail;
                split_at(pieces[k].begin + need);
                pieces[k].used = capacity;
                pieces[k].alloc[aj->job.id] += avail;
                left = 0;
                finish = pieces[k].end;
            }
        }
        if (left.sign() > 0) {
            throw ConstructionViolated("parallel work of batch " + aj->job.id +
                                       " does not fit its window");
        }
        Rational completion = max(seq_end, finish);
        if (completion > window_end) {
            throw ConstructionViolated("batch " + aj->job.id + " misses its deadline");
        }
        trace.job_completion[aj->job.id] = completion;
        trace.batch_completion[aj->job.id] = completion;
        trace.flow += completion - aj->arrival;
        trace.horizon = max(trace.horizon, completion);
    }

    Rational bound = (Rational(1) + Rational(1) / delta) * summary.total_flow;
    if (trace.flow > bound) {
        throw ConstructionViolated("constructed flow " + trace.flow.str() +
                                   " exceeds (1+1/delta) * " + summary.total_flow.str());
    }

    for (const Piece& piece : pieces) {
        if (piece.alloc.empty()) continue;
        JobInterval iv;
        iv.begin = piece.begin;
        iv.end = piece.end;
        iv.alloc = piece.alloc;
        iv.batch_alloc = piece.alloc;
        trace.intervals.push_back(std::move(iv));
    }
    return trace;
}

} // namespace bcast
