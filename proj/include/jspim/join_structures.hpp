#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "jspim/mem_model.hpp"
#include "jspim/pim_search.hpp"
#include "jspim/workload.hpp"

namespace jspim {

struct TraceRecorder;

// Fixed-width code assignment for one key column. Codes steer keys away from
// over-full buckets at encode time, so the PIM table never needs rehashing.
struct Dictionary {
    std::uint32_t code_bits = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> entries;  // (value, code), build order
    std::unordered_map<std::uint64_t, std::uint64_t> value_to_code;
    std::unordered_map<std::uint64_t, std::uint64_t> code_to_value;

    std::optional<std::uint64_t> encode(std::uint64_t value) const;
    std::uint64_t decode(std::uint64_t code) const;  // throws on unknown code
    std::uint64_t size() const { return entries.size(); }
    // Probe target for keys the dictionary cannot encode: the all-ones code,
    // which is never assigned and never matches an occupied slot.
    std::uint64_t miss_code() const { return (1ull << code_bits) - 1; }
};

// The unique-key table resident on the PIM chip, bucket-per-row.
struct PimHashTable {
    TableLayout layout;
    std::vector<BucketRow> buckets;  // size == layout.bucket_count()

    std::uint64_t occupied_entries() const;
    std::uint64_t non_empty_buckets() const;
};

// Host-side lists of dimension-row indices for duplicated keys. A handle is
// a dense index into lists; every list has length >= 2.
struct DuplicationList {
    std::vector<std::vector<std::uint64_t>> lists;

    std::uint64_t size() const { return lists.size(); }
    std::uint64_t total_entries() const;
};

// Everything the device holds for one join column: the hash table on the PIM
// chip, the encoded fact-key column on the regular chips, plus the host-side
// dictionary and duplication list.
struct PimState {
    PimHashTable table;
    Dictionary dict;
    DuplicationList dup;
    std::vector<std::uint64_t> fact_codes;
    std::uint32_t fact_word_bits = 0;
    bool populated = false;

    // Encoded fact keys packed per burst: floor(burst bits / word bits) codes
    // per burst across the regular chips.
    std::uint64_t keys_per_fetch_burst(const MemoryGeometry& g) const;
    std::uint64_t keys_per_fact_row(const MemoryGeometry& g) const;
    std::uint64_t fact_rows_used(const MemoryGeometry& g) const;
};

// Low index_bits of a code select the bucket; the remaining high bits are
// the stored tag.
std::uint64_t bucket_of(std::uint64_t code, std::uint32_t index_bits);
std::uint64_t tag_of(std::uint64_t code, std::uint32_t index_bits);
std::uint64_t code_from(std::uint64_t tag, std::uint64_t bucket, std::uint32_t index_bits);

// Picks code/index/value widths and row capacity for a table of
// distinct_keys over dim_rows rows: smallest index_bits whose bucket grid
// holds distinct_keys with 1.25x headroom within the PIM chip's rows.
TableLayout plan_table_layout(std::uint64_t distinct_keys, std::uint64_t dim_rows,
                              const MemoryGeometry& g);

// Candidate-code walk used by build_dictionary: starting from preferred_code,
// advance past assigned codes, sentinel-tagged codes, and full buckets until
// an under-full bucket accepts the candidate. Keys already placed are never
// rehashed.
std::uint64_t next_free_code(std::uint64_t preferred_code,
                             const std::unordered_map<std::uint64_t, bool>& assigned,
                             const std::vector<std::uint32_t>& bucket_fill,
                             const TableLayout& layout);

// Assigns codes in first-occurrence order. A key's initial candidate code is
// its insertion rank, remapped by next_free_code when it cannot be placed.
Dictionary build_dictionary(const std::vector<std::uint64_t>& dim_keys, const TableLayout& layout);

// Duplication-list construction: the first occurrence of a key is stored
// inline; the second occurrence moves the inline row index to the head of a
// fresh list and re-points the table entry at the list; later occurrences
// append. Keys must be encodable by dict.
struct HashStructures {
    PimHashTable table;
    DuplicationList dup;
};
HashStructures build_hash_structures(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& dim_table,
                                     const Dictionary& dict, const TableLayout& layout);

// Writes hash rows to their mapped locations and the encoded fact column
// contiguously to the regular chips, charging sequential whole-row burst
// writes. Returns the ready state and the modeled population cost.
struct PopulateResult {
    PimState state;
    Cycles population_cycles = 0;
};
PopulateResult populate_pim(PimHashTable table, DuplicationList dup,
                            const std::vector<std::uint64_t>& fact_keys, Dictionary dict,
                            const MemoryGeometry& g, const TimingParams& t,
                            BankState* bank = nullptr, std::uint32_t rank_replicas = 1);

// Re-derives the (key -> all dimension row indices) multimap from the table
// plus duplication list; used by invariant checks.
std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> expand_join_content(
    const PimState& pim);

// Byte accounting for the auxiliary structures of a workload versus its raw
// dataset size. Schema-level: nothing is materialized.
struct DataOverhead {
    std::uint64_t dictionary_bytes = 0;
    std::uint64_t encoded_fact_bytes = 0;
    std::uint64_t hash_table_bytes = 0;
    std::uint64_t duplication_bytes = 0;
    std::uint64_t raw_dataset_bytes = 0;

    std::uint64_t total_bytes() const {
        return dictionary_bytes + encoded_fact_bytes + hash_table_bytes + duplication_bytes;
    }
    double ratio() const {
        return raw_dataset_bytes ? double(total_bytes()) / double(raw_dataset_bytes) : 0.0;
    }
};
DataOverhead compute_data_overhead(const WorkloadSpec& spec, const MemoryGeometry& g);

}  // namespace jspim
