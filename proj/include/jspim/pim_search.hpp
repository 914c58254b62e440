#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "jspim/mem_model.hpp"

namespace jspim {

struct PimState;
struct TraceRecorder;

// One comparator slot: key tag (index bits stripped), payload value, and a
// flag marking the value as a duplication-list handle instead of a row index.
struct BucketEntry {
    std::uint64_t tag = 0;
    std::uint64_t value = 0;
    bool dup_flag = false;

    bool operator==(const BucketEntry&) const = default;
};

// Bit widths and row capacity for one hash table. A stored entry packs
// little-endian as tag (low bits), value, dup_flag (most significant bit).
// Empty slots carry the all-ones tag sentinel, so codes whose tag would be
// all ones are never assigned.
struct TableLayout {
    std::uint32_t code_bits = 0;
    std::uint32_t index_bits = 0;
    std::uint32_t value_bits = 0;
    std::uint32_t bucket_capacity = 0;  // slots per row

    std::uint32_t tag_bits() const { return code_bits - index_bits; }
    std::uint32_t entry_bits() const { return tag_bits() + value_bits + 1; }
    std::uint64_t bucket_count() const { return 1ull << index_bits; }
    std::uint64_t tag_sentinel() const { return (1ull << tag_bits()) - 1; }
    // Codes per bucket, capped by the reserved sentinel tag.
    std::uint64_t codes_per_bucket() const {
        const std::uint64_t tags = (1ull << tag_bits()) - 1;
        return tags < bucket_capacity ? tags : bucket_capacity;
    }
};

// One hash bucket, mapped one-to-one onto a PIM subarray row. Slots are
// positional; empty slots hold the sentinel tag.
struct BucketRow {
    std::uint64_t bucket_id = 0;
    std::vector<BucketEntry> slots;  // size == layout.bucket_capacity
    std::uint32_t occupancy = 0;

    bool empty() const { return occupancy == 0; }
};

BucketRow make_empty_row(std::uint64_t bucket_id, const TableLayout& layout);
bool slot_occupied(const BucketRow& row, std::uint32_t slot, const TableLayout& layout);

// Comparator outputs, one bit per slot.
struct MatchVector {
    std::vector<bool> bits;

    std::uint32_t count() const;
    std::optional<std::uint32_t> single() const;  // index of the one set bit
};

// Parallel compare of probe_tag against every occupied slot. Pure.
MatchVector compare_row(const BucketRow& row, std::uint64_t probe_tag, const TableLayout& layout);

struct ProbePayload {
    std::uint64_t value = 0;
    bool dup_flag = false;

    bool operator==(const ProbePayload&) const = default;
};

// Encodes the comparator outputs: exactly one bit -> that slot's payload,
// zero bits -> null. More than one bit means the unique-key invariant was
// broken and raises InvariantError.
std::optional<ProbePayload> match_select(const MatchVector& mv, const BucketRow& row);

struct ProbeResult {
    std::optional<ProbePayload> payload;
    Cycles cycles = 0;
};

// Full lookup of key_code: activates the bucket row selected by the code's
// index bits, compares tags, and returns the payload plus the modeled cost
// access_row + t_cmp + one result burst. Cost does not depend on occupancy
// or on whether the key matched.
ProbeResult probe(const PimState& pim, std::uint64_t key_code, BankState& bank,
                  const TimingParams& timing, const MemoryGeometry& geometry,
                  TraceRecorder* recorder = nullptr);

// Row image serialization in the layout's packing order (little-endian bits).
std::vector<std::uint8_t> pack_row(const BucketRow& row, const TableLayout& layout,
                                   const MemoryGeometry& g);
BucketRow unpack_row(const std::vector<std::uint8_t>& bytes, std::uint64_t bucket_id,
                     const TableLayout& layout, const MemoryGeometry& g);

}  // namespace jspim
