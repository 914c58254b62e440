#include "jspim/join_structures.hpp"

#include <algorithm>
#include <string>

#include "jspim/trace.hpp"

namespace jspim {

std::optional<std::uint64_t> Dictionary::encode(std::uint64_t value) const {
    auto it = value_to_code.find(value);
    if (it == value_to_code.end()) return std::nullopt;
    return it->second;
}

std::uint64_t Dictionary::decode(std::uint64_t code) const {
    auto it = code_to_value.find(code);
    if (it == code_to_value.end())
        throw InvariantError("code " + std::to_string(code) + " not in dictionary");
    return it->second;
}

std::uint64_t PimHashTable::occupied_entries() const {
    std::uint64_t n = 0;
    for (const BucketRow& row : buckets) n += row.occupancy;
    return n;
}

std::uint64_t PimHashTable::non_empty_buckets() const {
    std::uint64_t n = 0;
    for (const BucketRow& row : buckets) n += row.empty() ? 0 : 1;
    return n;
}

std::uint64_t DuplicationList::total_entries() const {
    std::uint64_t n = 0;
    for (const auto& l : lists) n += l.size();
    return n;
}

std::uint64_t PimState::keys_per_fetch_burst(const MemoryGeometry& g) const {
    return (g.burst_bits() * g.regular_chips()) / fact_word_bits;
}

std::uint64_t PimState::keys_per_fact_row(const MemoryGeometry& g) const {
    return keys_per_fetch_burst(g) * g.bursts_per_row();
}

std::uint64_t PimState::fact_rows_used(const MemoryGeometry& g) const {
    if (fact_codes.empty()) return 0;
    return ceil_div(fact_codes.size(), keys_per_fact_row(g));
}

std::uint64_t bucket_of(std::uint64_t code, std::uint32_t index_bits) {
    return code & ((1ull << index_bits) - 1);
}

std::uint64_t tag_of(std::uint64_t code, std::uint32_t index_bits) { return code >> index_bits; }

std::uint64_t code_from(std::uint64_t tag, std::uint64_t bucket, std::uint32_t index_bits) {
    return (tag << index_bits) | bucket;
}

TableLayout plan_table_layout(std::uint64_t distinct_keys, std::uint64_t dim_rows,
                              const MemoryGeometry& g) {
    if (distinct_keys == 0) throw ConfigError("cannot lay out a table with no keys");
    const std::uint64_t row_bits = g.row_bits();
    const std::uint64_t available_rows = g.rows_per_chip();
    const std::uint64_t needed = ceil_div(distinct_keys * 5, 4);  // 1.25x headroom

    // Row indices and duplication handles share the value field; handles are
    // at most dim_rows/2, so one extra bit always covers them.
    const std::uint32_t value_bits = std::max<std::uint32_t>(ceil_log2(dim_rows + 1), 2);

    auto make = [&](std::uint32_t index_bits, std::uint32_t code_bits) {
        TableLayout layout;
        layout.index_bits = index_bits;
        layout.code_bits = code_bits;
        layout.value_bits = value_bits;
        if (layout.entry_bits() > row_bits)
            throw CapacityError("a single entry does not fit the row buffer");
        layout.bucket_capacity = std::uint32_t(row_bits / layout.entry_bits());
        return layout;
    };

    // index_bits = ceil(log2(min(needed_buckets, available rows))); capacity
    // and index_bits depend on each other, so iterate to a fixpoint.
    std::uint32_t index_bits = 0;
    for (int iter = 0; iter < 8; ++iter) {
        const TableLayout trial =
            make(index_bits, std::max(ceil_log2(distinct_keys + 1), index_bits + 1));
        const std::uint64_t needed_buckets = ceil_div(needed, trial.bucket_capacity);
        const std::uint32_t next =
            ceil_log2(std::min<std::uint64_t>(needed_buckets, available_rows));
        if (next == index_bits) break;
        index_bits = next;
    }

    // Widen the code space until the bucket grid (sentinel tag excluded)
    // holds every key.
    std::uint32_t code_bits = std::max(ceil_log2(distinct_keys + 1), index_bits + 1);
    for (;;) {
        if (code_bits > 48)
            throw CapacityError("no bucket layout fits " + std::to_string(distinct_keys) +
                                " keys on the PIM chip");
        TableLayout layout = make(index_bits, code_bits);
        if (layout.bucket_count() > available_rows)
            throw CapacityError("table needs " + std::to_string(layout.bucket_count()) +
                                " buckets but the PIM chip has " +
                                std::to_string(available_rows) + " rows");
        if (layout.bucket_count() * layout.codes_per_bucket() >= needed) return layout;
        // Prefer more buckets while rows remain, otherwise more tag space.
        if (layout.bucket_count() * 2 <= available_rows &&
            ceil_div(needed, layout.bucket_capacity) > layout.bucket_count())
            ++index_bits;
        ++code_bits;
    }
}

std::uint64_t next_free_code(std::uint64_t preferred_code,
                             const std::unordered_map<std::uint64_t, bool>& assigned,
                             const std::vector<std::uint32_t>& bucket_fill,
                             const TableLayout& layout) {
    const std::uint64_t code_space = 1ull << layout.code_bits;
    const std::uint64_t per_bucket = layout.codes_per_bucket();
    const std::uint64_t sentinel_tag = layout.tag_sentinel();
    std::uint64_t code = preferred_code % code_space;
    for (std::uint64_t step = 0; step <= code_space; ++step) {
        const std::uint64_t bucket = bucket_of(code, layout.index_bits);
        if (tag_of(code, layout.index_bits) != sentinel_tag && !assigned.count(code) &&
            bucket_fill[bucket] < per_bucket) {
            return code;
        }
        code = (code + 1) % code_space;
    }
    throw CapacityError("dictionary probing exhausted the code space");
}

Dictionary build_dictionary(const std::vector<std::uint64_t>& dim_keys,
                            const TableLayout& layout) {
    Dictionary dict;
    dict.code_bits = layout.code_bits;

    const std::uint64_t bucket_count = layout.bucket_count();
    const std::uint64_t per_bucket = layout.codes_per_bucket();
    std::vector<std::uint32_t> bucket_fill(bucket_count, 0);
    std::unordered_map<std::uint64_t, bool> assigned;

    std::uint64_t rank = 0;
    for (std::uint64_t key : dim_keys) {
        if (dict.value_to_code.count(key)) continue;
        if (rank >= bucket_count * per_bucket)
            throw CapacityError("distinct keys exceed total bucket capacity " +
                                std::to_string(bucket_count * per_bucket));
        const std::uint64_t code = next_free_code(rank, assigned, bucket_fill, layout);
        assigned[code] = true;
        bucket_fill[bucket_of(code, layout.index_bits)]++;
        dict.entries.emplace_back(key, code);
        dict.value_to_code.emplace(key, code);
        dict.code_to_value.emplace(code, key);
        ++rank;
    }
    return dict;
}

HashStructures build_hash_structures(
    const std::vector<std::pair<std::uint64_t, std::uint64_t>>& dim_table, const Dictionary& dict,
    const TableLayout& layout) {
    HashStructures out;
    out.table.layout = layout;
    out.table.buckets.reserve(layout.bucket_count());
    for (std::uint64_t b = 0; b < layout.bucket_count(); ++b)
        out.table.buckets.push_back(make_empty_row(b, layout));

    // slot of each stored code, so later occurrences find their entry directly
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint32_t>> slot_of_code;

    for (const auto& [key, row_index] : dim_table) {
        const auto code = dict.encode(key);
        if (!code) throw InvariantError("dimension key not encodable by this dictionary");
        const std::uint64_t bucket = bucket_of(*code, layout.index_bits);
        const std::uint64_t tag = tag_of(*code, layout.index_bits);
        BucketRow& row = out.table.buckets[bucket];

        auto it = slot_of_code.find(*code);
        if (it == slot_of_code.end()) {
            std::uint32_t slot = 0;
            while (slot < row.slots.size() && slot_occupied(row, slot, layout)) ++slot;
            if (slot == row.slots.size())
                throw InvariantError("bucket " + std::to_string(bucket) +
                                     " overflowed; dictionary was built for another table");
            row.slots[slot] = BucketEntry{tag, row_index, false};
            row.occupancy++;
            slot_of_code.emplace(*code, std::make_pair(bucket, slot));
            continue;
        }
        BucketEntry& entry = out.table.buckets[it->second.first].slots[it->second.second];
        if (!entry.dup_flag) {
            // Second occurrence: move the inline row index to the head of a
            // fresh list and point the entry at it.
            const std::uint64_t handle = out.dup.lists.size();
            out.dup.lists.push_back({entry.value, row_index});
            entry.value = handle;
            entry.dup_flag = true;
        } else {
            out.dup.lists[entry.value].push_back(row_index);
        }
    }
    return out;
}

namespace {

Cycles write_row(BankState& bank, const Location& loc, std::uint64_t bursts,
                 const MemoryGeometry& g, const TimingParams& t, TraceRecorder* recorder) {
    const Cycles issue = bank.cycle_now;
    Cycles cost = access_row(bank, loc, g, t);
    cost += bursts * t.burst_unit();
    bank.cycle_now = issue + cost;
    if (recorder) recorder->write(location_to_address(loc, g), issue);
    return cost;
}

}  // namespace

PopulateResult populate_pim(PimHashTable table, DuplicationList dup,
                            const std::vector<std::uint64_t>& fact_keys, Dictionary dict,
                            const MemoryGeometry& g, const TimingParams& t, BankState* bank,
                            std::uint32_t rank_replicas) {
    PopulateResult out;
    BankState local;
    BankState& bs = bank ? *bank : local;

    PimState& pim = out.state;
    pim.table = std::move(table);
    pim.dict = std::move(dict);
    pim.dup = std::move(dup);
    pim.fact_word_bits = ceil_div(pim.table.layout.code_bits, 8) * 8;  // byte-aligned codes

    pim.fact_codes.reserve(fact_keys.size());
    for (std::uint64_t key : fact_keys) {
        const auto code = pim.dict.encode(key);
        pim.fact_codes.push_back(code ? *code : pim.dict.miss_code());
    }

    const std::uint64_t fact_rows = pim.fact_codes.empty()
                                        ? 0
                                        : ceil_div(pim.fact_codes.size(), pim.keys_per_fact_row(g));
    if (fact_rows > g.rows_per_chip())
        throw CapacityError("fact column needs " + std::to_string(fact_rows) +
                            " rows but the device has " + std::to_string(g.rows_per_chip()) +
                            "; partition the column and use double buffering");

    // Hash rows, replicated once per rank, then the fact column.
    for (std::uint32_t r = 0; r < rank_replicas; ++r) {
        for (const BucketRow& row : pim.table.buckets) {
            if (row.empty()) continue;
            out.population_cycles +=
                write_row(bs, map_bucket_to_location(row.bucket_id, g), g.bursts_per_row(), g, t,
                          nullptr);
        }
    }
    const std::uint64_t keys_per_row = pim.keys_per_fact_row(g);
    const std::uint64_t keys_per_burst = pim.keys_per_fetch_burst(g);
    for (std::uint64_t r = 0; r < fact_rows; ++r) {
        const std::uint64_t first = r * keys_per_row;
        const std::uint64_t in_row = std::min<std::uint64_t>(keys_per_row,
                                                             pim.fact_codes.size() - first);
        out.population_cycles += write_row(bs, fact_row_location(r, g),
                                           ceil_div(in_row, keys_per_burst), g, t, nullptr);
    }

    pim.populated = true;
    return out;
}

std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> expand_join_content(
    const PimState& pim) {
    std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> content;
    const TableLayout& layout = pim.table.layout;
    for (const BucketRow& row : pim.table.buckets) {
        for (std::uint32_t slot = 0; slot < row.slots.size(); ++slot) {
            if (!slot_occupied(row, slot, layout)) continue;
            const BucketEntry& e = row.slots[slot];
            const std::uint64_t code = code_from(e.tag, row.bucket_id, layout.index_bits);
            const std::uint64_t key = pim.dict.decode(code);
            if (e.dup_flag) {
                content[key] = pim.dup.lists.at(e.value);
            } else {
                content[key] = {e.value};
            }
        }
    }
    return content;
}

namespace {

struct SchemaTable {
    std::uint64_t rows;
    std::uint64_t raw_row_bytes;
};

// Raw per-row byte widths of the modeled star schema (all columns, not just
// the generated join columns).
constexpr std::uint64_t kLineorderRowBytes = 136;  // 17 attributes
constexpr std::uint64_t kCustomerRowBytes = 128;
constexpr std::uint64_t kPartRowBytes = 126;
constexpr std::uint64_t kSupplierRowBytes = 112;
constexpr std::uint64_t kDateRowBytes = 136;
constexpr std::uint64_t kSyntheticRowBytes = 8;  // 32-bit key + 32-bit value

struct DimAccounting {
    std::uint64_t dictionary_bytes = 0;
    std::uint64_t hash_table_bytes = 0;
    std::uint64_t encoded_column_bytes = 0;
};

DimAccounting account_dimension(std::uint64_t distinct, std::uint64_t dim_rows,
                                std::uint64_t fact_rows, const MemoryGeometry& g) {
    const TableLayout layout = plan_table_layout(distinct, dim_rows, g);
    DimAccounting a;
    const std::uint64_t code_bytes = ceil_div(layout.code_bits, 8);
    a.dictionary_bytes = distinct * (8 + code_bytes);
    const std::uint64_t entry_bytes = ceil_div(layout.entry_bits(), 8);
    a.hash_table_bytes = distinct * entry_bytes * g.total_ranks();  // replicated per rank
    a.encoded_column_bytes = fact_rows * code_bytes;
    return a;
}

}  // namespace

DataOverhead compute_data_overhead(const WorkloadSpec& spec, const MemoryGeometry& g) {
    DataOverhead o;
    if (spec.kind == WorkloadKind::SsbLike) {
        const SsbRowCounts c = ssb_row_counts(spec.scale_factor);
        const SchemaTable dims[] = {{c.customer, kCustomerRowBytes},
                                    {c.part, kPartRowBytes},
                                    {c.supplier, kSupplierRowBytes},
                                    {c.date, kDateRowBytes}};
        for (const SchemaTable& d : dims) {
            const DimAccounting a = account_dimension(d.rows, d.rows, c.lineorder, g);
            o.dictionary_bytes += a.dictionary_bytes;
            o.hash_table_bytes += a.hash_table_bytes;
            o.encoded_fact_bytes += a.encoded_column_bytes;
            o.raw_dataset_bytes += d.rows * d.raw_row_bytes;
        }
        o.raw_dataset_bytes += c.lineorder * kLineorderRowBytes;
        o.duplication_bytes = 0;  // dimension keys are unique
    } else {
        const std::uint64_t s_rows = spec.size_r * spec.multiplier;
        const DimAccounting a = account_dimension(spec.size_r, spec.size_r, s_rows, g);
        o.dictionary_bytes = a.dictionary_bytes;
        o.hash_table_bytes = a.hash_table_bytes;
        o.encoded_fact_bytes = a.encoded_column_bytes;
        o.duplication_bytes = 0;  // R's keys are unique
        o.raw_dataset_bytes = (spec.size_r + s_rows) * kSyntheticRowBytes;
    }
    return o;
}

}  // namespace jspim
