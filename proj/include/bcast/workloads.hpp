#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bcast/baselines.hpp"
#include "bcast/instance.hpp"
#include "bcast/jobs.hpp"
#include "bcast/prng.hpp"

namespace bcast {

// The three-item, four-request workload used as the running example: items
// A, B, C of length 3/2; one request for all three at t = 0 and one
// singleton per item at t = 1, 2, 3.
inline BroadcastInstance gen_figure1() {
    BroadcastInstance inst;
    inst.items = {{"A", Rational::of(3, 2)}, {"B", Rational::of(3, 2)}, {"C", Rational::of(3, 2)}};
    inst.requests = {{"S1", Rational(0), {"A", "B", "C"}},
                     {"S2", Rational(1), {"A"}},
                     {"S3", Rational(2), {"B"}},
                     {"S4", Rational(3), {"C"}}};
    return inst;
}

namespace detail {

inline int exact_sqrt(int n) {
    int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    while (root * root > n) --root;
    while ((root + 1) * (root + 1) <= n) ++root;
    return root * root == n ? root : -1;
}

inline std::string padded_id(char prefix, int value, int width) {
    std::string digits = std::to_string(value);
    std::string out(1, prefix);
    out.append(width > static_cast<int>(digits.size()) ? width - digits.size() : 0, '0');
    out += digits;
    return out;
}

} // namespace detail

struct AdversaryReport {
    BroadcastInstance instance;
    Rational probe_time;
    std::map<std::string, Rational> probe_service; // cumulative work by the probe
    std::vector<std::string> big_set;              // the n - sqrt(n) most-served items
};

// Adaptive adversary against a dependency-ignoring scheduler: run the
// baseline on n unit items demanded independently at t = 0, rank items by
// cumulative service at t = (n - sqrt(n))/s, then emit one request for the
// n - sqrt(n) most-served items plus one singleton per remaining item, all
// at t = 0. Service ties break toward the lower item id.
inline AdversaryReport gen_fact1_adversarial(int n, const Rational& speed, Baseline baseline,
                                             const Rational& quantum = Rational(1)) {
    int root = detail::exact_sqrt(n);
    if (root < 2) throw ValidationError("n must be a perfect square >= 4");
    if (speed.sign() <= 0) throw ValidationError("speed must be positive");

    int width = static_cast<int>(std::to_string(n).size());
    BroadcastInstance probe;
    for (int i = 1; i <= n; ++i) {
        std::string id = detail::padded_id('I', i, width);
        probe.items.push_back({id, Rational(1)});
        probe.requests.push_back({detail::padded_id('P', i, width), Rational(0), {id}});
    }

    BroadcastTrace probe_trace = simulate_ignore_deps(probe, speed, baseline, quantum);
    AdversaryReport report;
    report.probe_time = Rational(n - root) / speed;

    std::vector<std::pair<Rational, int>> ranked; // (service, index)
    for (int i = 0; i < n; ++i) {
        Rational service = integrate_item_rate(probe_trace.schedule, probe.items[i].id,
                                               Rational(0), report.probe_time);
        report.probe_service[probe.items[i].id] = service;
        ranked.push_back({service, i});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });

    report.instance.items = probe.items;
    Request big;
    big.id = "R0";
    big.arrival = Rational(0);
    std::vector<bool> in_big(n, false);
    for (int k = 0; k < n - root; ++k) {
        in_big[ranked[k].second] = true;
        report.big_set.push_back(probe.items[ranked[k].second].id);
    }
    std::sort(report.big_set.begin(), report.big_set.end());
    big.items = report.big_set;
    report.instance.requests.push_back(std::move(big));
    int singleton = 1;
    for (int i = 0; i < n; ++i) {
        if (in_big[i]) continue;
        report.instance.requests.push_back({detail::padded_id('S', singleton++, width),
                                            Rational(0),
                                            {probe.items[i].id}});
    }
    return report;
}

// Randomized counterpart: one request for a uniform random subset of size
// n - sqrt(n), and one singleton for each of the remaining sqrt(n) items,
// all arriving at t = 0. The subset comes from a splitmix64-seeded
// Fisher-Yates shuffle, so a seed fully determines the instance.
inline BroadcastInstance gen_fact1_randomized(int n, std::uint64_t seed) {
    int root = detail::exact_sqrt(n);
    if (root < 2) throw ValidationError("n must be a perfect square >= 4");

    int width = static_cast<int>(std::to_string(n).size());
    BroadcastInstance inst;
    for (int i = 1; i <= n; ++i) {
        inst.items.push_back({detail::padded_id('I', i, width), Rational(1)});
    }

    SplitMix64 rng(seed);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    for (int i = n - 1; i > 0; --i) {
        int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }

    Request big;
    big.id = "R0";
    big.arrival = Rational(0);
    for (int k = 0; k < n - root; ++k) big.items.push_back(inst.items[order[k]].id);
    std::sort(big.items.begin(), big.items.end());
    inst.requests.push_back(std::move(big));
    for (int k = 0; k < root; ++k) {
        inst.requests.push_back({detail::padded_id('S', k + 1, width),
                                 Rational(0),
                                 {inst.items[order[n - root + k]].id}});
    }
    return inst;
}

struct RandomInstanceParams {
    int n_items = 3;
    int n_requests = 4;
    Rational zipf_theta = Rational(0); // popularity skew; 0 = uniform
    int max_set = 2;
    Rational len_min = Rational::of(1, 2);
    Rational len_max = Rational(1);
    Rational horizon = Rational(2); // arrivals drawn from [0, horizon]
    Rational grid = Rational::of(1, 4);
};

// Correlated random workload: item lengths uniform on the grid within
// [len_min, len_max], request sizes uniform in [1, max_set], members drawn
// by Zipf(theta) popularity without replacement, arrivals uniform on the
// grid within [0, horizon].
inline BroadcastInstance gen_random_correlated(const RandomInstanceParams& params,
                                               std::uint64_t seed) {
    if (params.n_items < 1 || params.n_requests < 0 || params.max_set < 1 ||
        params.max_set > params.n_items || params.grid.sign() <= 0 ||
        params.len_min.sign() <= 0 || params.len_max < params.len_min ||
        params.horizon.sign() < 0 || params.zipf_theta.sign() < 0) {
        throw ValidationError("bad generator parameters");
    }
    if (!divides(params.grid, params.len_min) || !divides(params.grid, params.len_max)) {
        throw ValidationError("length range must sit on the grid");
    }

    SplitMix64 rng(seed);
    int width = static_cast<int>(std::to_string(params.n_items).size());
    BroadcastInstance inst;

    std::uint64_t len_choices =
        static_cast<std::uint64_t>(exact_quotient(params.len_max - params.len_min, params.grid)) + 1;
    for (int i = 1; i <= params.n_items; ++i) {
        Rational len = params.len_min + params.grid * Rational(static_cast<long long>(
                                                         rng.below(len_choices)));
        inst.items.push_back({detail::padded_id('I', i, width), len});
    }

    double theta = params.zipf_theta.approx();
    std::vector<double> weight(params.n_items);
    for (int i = 0; i < params.n_items; ++i) {
        weight[i] = std::pow(static_cast<double>(i + 1), -theta);
    }

    std::uint64_t arrival_choices =
        params.horizon.is_zero()
            ? 1
            : static_cast<std::uint64_t>(exact_quotient(params.horizon, params.grid)) + 1;
    int req_width = static_cast<int>(std::to_string(params.n_requests).size());
    for (int r = 1; r <= params.n_requests; ++r) {
        Request req;
        req.id = detail::padded_id('R', r, req_width);
        req.arrival = params.grid * Rational(static_cast<long long>(rng.below(arrival_choices)));
        int size = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.max_set)));
        std::vector<bool> taken(params.n_items, false);
        for (int pick = 0; pick < size; ++pick) {
            double total = 0;
            for (int i = 0; i < params.n_items; ++i) {
                if (!taken[i]) total += weight[i];
            }
            double mark = rng.unit() * total;
            int chosen = -1;
            for (int i = 0; i < params.n_items; ++i) {
                if (taken[i]) continue;
                mark -= weight[i];
                if (mark <= 0) {
                    chosen = i;
                    break;
                }
            }
            if (chosen < 0) { // floating-point slack: take the last free item
                for (int i = params.n_items - 1; i >= 0; --i) {
                    if (!taken[i]) {
                        chosen = i;
                        break;
                    }
                }
            }
            taken[chosen] = true;
            req.items.push_back(inst.items[chosen].id);
        }
        std::sort(req.items.begin(), req.items.end());
        inst.requests.push_back(std::move(req));
    }
    return inst;
}

struct RandomBatchParams {
    int max_batches = 5;
    int max_jobs = 4;
    Rational max_seq = Rational(2);
    Rational max_par = Rational(2);
    Rational max_arrival = Rational(3);
    Rational grid = Rational::of(1, 4);
    Rational processors = Rational(1);
    bool allow_zero_works = true;
};

// Random Seq-Par batch instances with works and arrivals on the grid.
inline BatchInstance gen_random_batches(const RandomBatchParams& params, std::uint64_t seed) {
    SplitMix64 rng(seed);
    BatchInstance bi;
    bi.processors = params.processors;
    auto draw = [&](const Rational& cap, bool allow_zero) {
        std::uint64_t choices = static_cast<std::uint64_t>(exact_quotient(cap, params.grid));
        if (allow_zero) {
            return params.grid * Rational(static_cast<long long>(rng.below(choices + 1)));
        }
        return params.grid * Rational(static_cast<long long>(rng.below(choices)) + 1);
    };
    int n_batches = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.max_batches)));
    for (int b = 1; b <= n_batches; ++b) {
        Batch batch;
        batch.id = "B" + std::to_string(b);
        batch.arrival = draw(params.max_arrival, true);
        int n_jobs = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(params.max_jobs)));
        for (int j = 1; j <= n_jobs; ++j) {
            SeqParJob job;
            job.id = "J" + std::to_string(j);
            job.seq_work = draw(params.max_seq, params.allow_zero_works);
            job.par_work = draw(params.max_par, params.allow_zero_works);
            batch.jobs.push_back(std::move(job));
        }
        bi.batches.push_back(std::move(batch));
    }
    return bi;
}

} // namespace bcast
