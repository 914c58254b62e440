#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jspim/query_engine.hpp"

namespace jspim {

// Exact O(|R|*|S|) cross-filter join; correctness oracle, desk scale only.
std::vector<JoinRow> nested_loop_join(const std::vector<std::uint64_t>& fact_keys,
                                      const std::vector<std::uint64_t>& dim_keys);

struct HashJoinRun {
    std::vector<JoinRow> rows;
    double wall_seconds = 0.0;
    std::uint32_t threads = 1;
};

// Classic hash join: build on the smaller side, probe the larger. Output
// multiset equals nested_loop_join; wall clock measured for reporting only.
HashJoinRun classic_hash_join(const std::vector<std::uint64_t>& fact_keys,
                              const std::vector<std::uint64_t>& dim_keys);

struct SpeedupReport {
    std::uint64_t workload_hash = 0;
    Cycles jspim_cycles = 0;
    double jspim_seconds = 0.0;
    double baseline_seconds = 0.0;
    double speedup = 0.0;
    std::uint32_t baseline_threads = 1;
    std::string caveat;
};

// Converts modeled cycles to seconds and pairs them with the measured
// software join. Rejects runs over different workloads.
SpeedupReport compare_runs(std::uint64_t jspim_workload_hash, Cycles jspim_cycles,
                           std::uint64_t baseline_workload_hash, double baseline_seconds,
                           std::uint32_t baseline_threads, const TimingParams& timing);

}  // namespace jspim
