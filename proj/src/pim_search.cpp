#include "jspim/pim_search.hpp"

#include <string>

#include "jspim/join_structures.hpp"
#include "jspim/trace.hpp"

namespace jspim {

BucketRow make_empty_row(std::uint64_t bucket_id, const TableLayout& layout) {
    BucketRow row;
    row.bucket_id = bucket_id;
    BucketEntry empty;
    empty.tag = layout.tag_sentinel();
    row.slots.assign(layout.bucket_capacity, empty);
    row.occupancy = 0;
    return row;
}

bool slot_occupied(const BucketRow& row, std::uint32_t slot, const TableLayout& layout) {
    return row.slots[slot].tag != layout.tag_sentinel();
}

std::uint32_t MatchVector::count() const {
    std::uint32_t n = 0;
    for (bool b : bits) n += b ? 1 : 0;
    return n;
}

std::optional<std::uint32_t> MatchVector::single() const {
    std::optional<std::uint32_t> hit;
    for (std::uint32_t i = 0; i < bits.size(); ++i) {
        if (!bits[i]) continue;
        if (hit) return std::nullopt;
        hit = i;
    }
    return hit;
}

MatchVector compare_row(const BucketRow& row, std::uint64_t probe_tag, const TableLayout& layout) {
    MatchVector mv;
    mv.bits.resize(row.slots.size(), false);
    const std::uint64_t sentinel = layout.tag_sentinel();
    for (std::uint32_t i = 0; i < row.slots.size(); ++i) {
        const BucketEntry& e = row.slots[i];
        mv.bits[i] = (e.tag != sentinel) && (e.tag == probe_tag);
    }
    return mv;
}

std::optional<ProbePayload> match_select(const MatchVector& mv, const BucketRow& row) {
    const std::uint32_t matches = mv.count();
    if (matches == 0) return std::nullopt;
    if (matches > 1)
        throw InvariantError("bucket " + std::to_string(row.bucket_id) + " holds " +
                             std::to_string(matches) + " entries with the same tag");
    const std::uint32_t slot = *mv.single();
    return ProbePayload{row.slots[slot].value, row.slots[slot].dup_flag};
}

ProbeResult probe(const PimState& pim, std::uint64_t key_code, BankState& bank,
                  const TimingParams& timing, const MemoryGeometry& geometry,
                  TraceRecorder* recorder) {
    const TableLayout& layout = pim.table.layout;
    if (key_code >= (1ull << layout.code_bits))
        throw ConfigError("key code " + std::to_string(key_code) + " exceeds " +
                          std::to_string(layout.code_bits) + "-bit code space");

    const std::uint64_t bucket = bucket_of(key_code, layout.index_bits);
    const std::uint64_t tag = tag_of(key_code, layout.index_bits);
    const Location loc = map_bucket_to_location(bucket, geometry);

    const Cycles issue = bank.cycle_now;
    Cycles cycles = access_row(bank, loc, geometry, timing);
    cycles += timing.t_cmp;
    if (recorder) {
        recorder->read(location_to_address(loc, geometry), issue);
        recorder->read(rlu_window_base(geometry), issue + cycles);
    }
    cycles += burst_transfer_cycles(1, layout.value_bits + 1, geometry, timing);
    bank.cycle_now = issue + cycles;

    const BucketRow& row = pim.table.buckets[bucket];
    const MatchVector mv = compare_row(row, tag, layout);
    return ProbeResult{match_select(mv, row), cycles};
}

namespace {

void put_bits(std::vector<std::uint8_t>& bytes, std::uint64_t bit_pos, std::uint64_t value,
              std::uint32_t width) {
    for (std::uint32_t b = 0; b < width; ++b) {
        if ((value >> b) & 1) bytes[(bit_pos + b) / 8] |= std::uint8_t(1u << ((bit_pos + b) % 8));
    }
}

std::uint64_t get_bits(const std::vector<std::uint8_t>& bytes, std::uint64_t bit_pos,
                       std::uint32_t width) {
    std::uint64_t v = 0;
    for (std::uint32_t b = 0; b < width; ++b) {
        if (bytes[(bit_pos + b) / 8] & (1u << ((bit_pos + b) % 8))) v |= (1ull << b);
    }
    return v;
}

}  // namespace

std::vector<std::uint8_t> pack_row(const BucketRow& row, const TableLayout& layout,
                                   const MemoryGeometry& g) {
    std::vector<std::uint8_t> bytes(g.row_bytes(), 0);
    const std::uint32_t entry_bits = layout.entry_bits();
    for (std::uint32_t i = 0; i < row.slots.size(); ++i) {
        const BucketEntry& e = row.slots[i];
        const std::uint64_t base = std::uint64_t(i) * entry_bits;
        put_bits(bytes, base, e.tag, layout.tag_bits());
        put_bits(bytes, base + layout.tag_bits(), e.value, layout.value_bits);
        put_bits(bytes, base + layout.tag_bits() + layout.value_bits, e.dup_flag ? 1 : 0, 1);
    }
    return bytes;
}

BucketRow unpack_row(const std::vector<std::uint8_t>& bytes, std::uint64_t bucket_id,
                     const TableLayout& layout, const MemoryGeometry& g) {
    if (bytes.size() != g.row_bytes())
        throw ConfigError("row image size mismatch: " + std::to_string(bytes.size()));
    BucketRow row = make_empty_row(bucket_id, layout);
    const std::uint32_t entry_bits = layout.entry_bits();
    for (std::uint32_t i = 0; i < layout.bucket_capacity; ++i) {
        const std::uint64_t base = std::uint64_t(i) * entry_bits;
        BucketEntry e;
        e.tag = get_bits(bytes, base, layout.tag_bits());
        e.value = get_bits(bytes, base + layout.tag_bits(), layout.value_bits);
        e.dup_flag = get_bits(bytes, base + layout.tag_bits() + layout.value_bits, 1) != 0;
        row.slots[i] = e;
        if (e.tag != layout.tag_sentinel()) row.occupancy++;
    }
    return row;
}

}  // namespace jspim
