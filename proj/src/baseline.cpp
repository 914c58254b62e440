#include "jspim/baseline.hpp"

#include <chrono>
#include <unordered_map>

namespace jspim {

std::vector<JoinRow> nested_loop_join(const std::vector<std::uint64_t>& fact_keys,
                                      const std::vector<std::uint64_t>& dim_keys) {
    std::vector<JoinRow> rows;
    for (std::uint64_t f = 0; f < fact_keys.size(); ++f) {
        const std::uint64_t key = fact_keys[f];
        for (std::uint64_t d = 0; d < dim_keys.size(); ++d) {
            if (dim_keys[d] == key) rows.push_back(JoinRow{key, f, d});
        }
    }
    return rows;
}

HashJoinRun classic_hash_join(const std::vector<std::uint64_t>& fact_keys,
                              const std::vector<std::uint64_t>& dim_keys) {
    HashJoinRun run;
    const auto t0 = std::chrono::steady_clock::now();

    // Build on the smaller side, probe the larger; emit (fact, dim) pairs
    // either way.
    if (dim_keys.size() <= fact_keys.size()) {
        std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> ht;
        ht.reserve(dim_keys.size());
        for (std::uint64_t d = 0; d < dim_keys.size(); ++d) ht[dim_keys[d]].push_back(d);
        for (std::uint64_t f = 0; f < fact_keys.size(); ++f) {
            auto it = ht.find(fact_keys[f]);
            if (it == ht.end()) continue;
            for (std::uint64_t d : it->second) run.rows.push_back(JoinRow{fact_keys[f], f, d});
        }
    } else {
        std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> ht;
        ht.reserve(fact_keys.size());
        for (std::uint64_t f = 0; f < fact_keys.size(); ++f) ht[fact_keys[f]].push_back(f);
        for (std::uint64_t d = 0; d < dim_keys.size(); ++d) {
            auto it = ht.find(dim_keys[d]);
            if (it == ht.end()) continue;
            for (std::uint64_t f : it->second) run.rows.push_back(JoinRow{dim_keys[d], f, d});
        }
    }

    const auto t1 = std::chrono::steady_clock::now();
    run.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    run.threads = 1;
    return run;
}

SpeedupReport compare_runs(std::uint64_t jspim_workload_hash, Cycles jspim_cycles,
                           std::uint64_t baseline_workload_hash, double baseline_seconds,
                           std::uint32_t baseline_threads, const TimingParams& timing) {
    if (jspim_workload_hash != baseline_workload_hash)
        throw InvariantError("comparison rejected: runs cover different workloads");
    SpeedupReport r;
    r.workload_hash = jspim_workload_hash;
    r.jspim_cycles = jspim_cycles;
    r.jspim_seconds = timing.cycles_to_seconds(jspim_cycles);
    r.baseline_seconds = baseline_seconds;
    r.speedup = r.jspim_seconds > 0.0 ? baseline_seconds / r.jspim_seconds : 0.0;
    r.baseline_threads = baseline_threads;
    r.caveat =
        "modeled cycles vs measured wall clock: indicative only, not a calibrated comparison";
    return r;
}

}  // namespace jspim
