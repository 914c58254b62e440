#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jspim/join_structures.hpp"
#include "jspim/rlu_pipeline.hpp"

namespace jspim {

struct JoinRow {
    std::uint64_t key = 0;
    std::uint64_t fact_index = 0;
    std::uint64_t dim_index = 0;

    bool operator==(const JoinRow&) const = default;
    bool operator<(const JoinRow& o) const {
        if (fact_index != o.fact_index) return fact_index < o.fact_index;
        if (dim_index != o.dim_index) return dim_index < o.dim_index;
        return key < o.key;
    }
};

struct LatencyReport {
    Cycles total_cycles = 0;  // max over ranks
    std::vector<Cycles> per_rank_cycles;
    Cycles population_cycles = 0;  // setup, reported separately
    std::uint64_t expansion_rows = 0;
    Cycles host_expansion_cycles = 0;  // expansion_rows x knob, not in total_cycles
    PipelineCounts counts;             // summed over ranks
    Cycles stage_busy[4] = {0, 0, 0, 0};
};

// A built-and-populated join column plus per-rank bank state. Queries run
// serially against one session.
struct QuerySession {
    MemoryGeometry geometry;
    TimingParams timing;
    RluConfig rlu;
    std::uint32_t ranks = 1;
    Cycles host_expand_cycles_per_row = 0;

    PimState pim;
    std::vector<BankState> rank_banks;
    Cycles population_cycles = 0;
    double data_construction_ms = 0.0;  // host wall clock of the build phase

    TraceRecorder* recorder = nullptr;
};

// Builds dictionary + hash structures + duplication list for dim_keys and
// populates the device with the encoded fact column, partitioned round-robin
// free: contiguous equal chunks across ranks.
QuerySession build_session(const std::vector<std::uint64_t>& fact_keys,
                           const std::vector<std::uint64_t>& dim_keys,
                           const MemoryGeometry& geometry, const TimingParams& timing,
                           const RluConfig& rlu, std::uint32_t ranks);

struct JoinOutput {
    std::vector<JoinRow> rows;
    LatencyReport latency;
};

// Inner join of the session's fact column against its dimension: every fact
// key's probe payload, expanded through the duplication list on the host.
JoinOutput join(QuerySession& session);

struct DistinctOutput {
    std::set<std::uint64_t> values;
    Cycles cycles = 0;
    std::uint64_t activations = 0;
};

// All stored keys, decoded: one activation per non-empty bucket row plus the
// bursts to stream its occupied entries out.
DistinctOutput select_distinct(QuerySession& session);

struct WhereEqOutput {
    std::vector<std::uint64_t> fact_indices;  // dimension-row indices with column == literal
    Cycles cycles = 0;
};

// Equality filter via a single cold probe; cost is independent of table size
// and of whether the literal matches.
WhereEqOutput select_where_eq(QuerySession& session, std::uint64_t literal);

struct UpdateResult {
    bool applied = false;
    Cycles cycles = 0;
};

// Writes one entry into a hash bucket slot; re-validates the row and rejects
// writes that would duplicate a tag.
UpdateResult entry_update_hash(QuerySession& session, std::uint64_t bucket_id, std::uint32_t slot,
                               const BucketEntry& entry);

// Overwrites one encoded fact key.
UpdateResult entry_update_fact(QuerySession& session, std::uint64_t fact_index,
                               std::uint64_t new_key);

// Probes for key; on a match overwrites the value field in place (dup flag
// preserved). Misses leave the table unchanged.
UpdateResult index_update(QuerySession& session, std::uint64_t key, std::uint64_t new_value);

// Contiguous rewrite of the fact column starting at start_index, charged as
// whole-row burst writes.
UpdateResult table_update(QuerySession& session, std::uint64_t start_index,
                          const std::vector<std::uint64_t>& new_keys);

}  // namespace jspim
