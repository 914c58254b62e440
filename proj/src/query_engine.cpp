#include "jspim/query_engine.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "jspim/trace.hpp"

namespace jspim {

QuerySession build_session(const std::vector<std::uint64_t>& fact_keys,
                           const std::vector<std::uint64_t>& dim_keys,
                           const MemoryGeometry& geometry, const TimingParams& timing,
                           const RluConfig& rlu, std::uint32_t ranks) {
    geometry.validate();
    timing.validate();
    if (ranks < 1) throw ConfigError("ranks must be >= 1");
    if (ranks > geometry.total_ranks())
        throw ConfigError("ranks " + std::to_string(ranks) + " exceeds the device's " +
                          std::to_string(geometry.total_ranks()));
    if (dim_keys.empty()) throw ConfigError("dimension table is empty");

    QuerySession s;
    s.geometry = geometry;
    s.timing = timing;
    s.rlu = rlu;
    s.rlu.mode = set_mode(s.rlu.mode, RluCommand::PimStart);
    s.ranks = ranks;

    const auto t0 = std::chrono::steady_clock::now();
    std::uint64_t distinct = 0;
    {
        std::unordered_map<std::uint64_t, bool> seen;
        for (std::uint64_t k : dim_keys)
            if (seen.emplace(k, true).second) ++distinct;
    }
    const TableLayout layout = plan_table_layout(distinct, dim_keys.size(), geometry);
    Dictionary dict = build_dictionary(dim_keys, layout);

    std::vector<std::pair<std::uint64_t, std::uint64_t>> dim_table;
    dim_table.reserve(dim_keys.size());
    for (std::uint64_t i = 0; i < dim_keys.size(); ++i) dim_table.emplace_back(dim_keys[i], i);
    HashStructures hs = build_hash_structures(dim_table, dict, layout);
    const auto t1 = std::chrono::steady_clock::now();
    s.data_construction_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    s.rank_banks.resize(ranks);
    PopulateResult pop = populate_pim(std::move(hs.table), std::move(hs.dup), fact_keys,
                                      std::move(dict), geometry, timing, nullptr, ranks);
    s.pim = std::move(pop.state);
    s.population_cycles = pop.population_cycles;
    return s;
}

namespace {

// Contiguous equal chunks in key order, one per rank.
std::vector<std::pair<std::uint64_t, std::uint64_t>> rank_chunks(std::uint64_t n,
                                                                 std::uint32_t ranks) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> chunks;
    const std::uint64_t base = n / ranks;
    const std::uint64_t extra = n % ranks;
    std::uint64_t begin = 0;
    for (std::uint32_t r = 0; r < ranks; ++r) {
        const std::uint64_t len = base + (r < extra ? 1 : 0);
        chunks.emplace_back(begin, begin + len);
        begin += len;
    }
    return chunks;
}

void accumulate_counts(PipelineCounts& into, const PipelineCounts& from) {
    into.key_fetch_bursts += from.key_fetch_bursts;
    into.probes_issued += from.probes_issued;
    into.probes_coalesced += from.probes_coalesced;
    into.row_activations += from.row_activations;
    into.row_hits += from.row_hits;
    into.results_returned += from.results_returned;
    into.stall_cycles += from.stall_cycles;
}

}  // namespace

JoinOutput join(QuerySession& session) {
    if (!session.pim.populated) throw StateError("join requires built and populated structures");

    JoinOutput out;
    out.latency.population_cycles = session.population_cycles;
    out.latency.per_rank_cycles.resize(session.ranks, 0);

    const auto chunks = rank_chunks(session.pim.fact_codes.size(), session.ranks);
    std::vector<StreamResult> rank_results(session.ranks);
    for (std::uint32_t r = 0; r < session.ranks; ++r) {
        const auto [begin, end] = chunks[r];
        std::vector<std::uint64_t> codes(session.pim.fact_codes.begin() + std::int64_t(begin),
                                         session.pim.fact_codes.begin() + std::int64_t(end));
        rank_results[r] = run_join_stream(session.pim, codes, session.rlu, session.timing,
                                          session.geometry, session.rank_banks[r],
                                          r == 0 ? session.recorder : nullptr);
        out.latency.per_rank_cycles[r] = rank_results[r].trace.total_cycles;
        out.latency.total_cycles =
            std::max(out.latency.total_cycles, rank_results[r].trace.total_cycles);
        accumulate_counts(out.latency.counts, rank_results[r].trace.counts);
        for (int stg = 0; stg < 4; ++stg)
            out.latency.stage_busy[stg] += rank_results[r].trace.stage_busy[stg];
    }

    // Host-side expansion of duplication handles; row counts reported, cycles
    // charged only through the optional knob.
    for (std::uint32_t r = 0; r < session.ranks; ++r) {
        const auto [begin, end] = chunks[r];
        const auto& results = rank_results[r].results;
        for (std::uint64_t i = 0; i < results.size(); ++i) {
            const auto& payload = results[i];
            if (!payload) continue;
            const std::uint64_t fact_index = begin + i;
            const std::uint64_t key = session.pim.dict.decode(session.pim.fact_codes[fact_index]);
            if (payload->dup_flag) {
                for (std::uint64_t dim_index : session.pim.dup.lists.at(payload->value)) {
                    out.rows.push_back(JoinRow{key, fact_index, dim_index});
                    out.latency.expansion_rows++;
                }
            } else {
                out.rows.push_back(JoinRow{key, fact_index, payload->value});
                out.latency.expansion_rows++;
            }
        }
    }
    out.latency.host_expansion_cycles =
        out.latency.expansion_rows * session.host_expand_cycles_per_row;
    return out;
}

DistinctOutput select_distinct(QuerySession& session) {
    if (!session.pim.populated) throw StateError("select distinct requires populated structures");
    DistinctOutput out;
    const TableLayout& layout = session.pim.table.layout;
    BankState bank;  // fresh open-row state: cost independent of query history
    for (const BucketRow& row : session.pim.table.buckets) {
        if (row.empty()) continue;
        out.activations++;
        out.cycles += access_row(bank, map_bucket_to_location(row.bucket_id, session.geometry),
                                 session.geometry, session.timing);
        out.cycles += session.timing.t_cmp;
        out.cycles += burst_transfer_cycles(row.occupancy, layout.entry_bits(), session.geometry,
                                            session.timing);
        for (std::uint32_t slot = 0; slot < row.slots.size(); ++slot) {
            if (!slot_occupied(row, slot, layout)) continue;
            out.values.insert(session.pim.dict.decode(
                code_from(row.slots[slot].tag, row.bucket_id, layout.index_bits)));
        }
    }
    return out;
}

WhereEqOutput select_where_eq(QuerySession& session, std::uint64_t literal) {
    if (!session.pim.populated) throw StateError("select where requires populated structures");
    WhereEqOutput out;

    const auto code = session.pim.dict.encode(literal);
    // Unencodable literals still issue the probe; the miss code never matches.
    const std::uint64_t probe_code = code ? *code : session.pim.dict.miss_code();

    BankState bank;  // cold probe: one activation regardless of table size
    ProbeResult pr =
        probe(session.pim, probe_code, bank, session.timing, session.geometry, nullptr);
    out.cycles = pr.cycles;
    if (pr.payload) {
        if (pr.payload->dup_flag)
            out.fact_indices = session.pim.dup.lists.at(pr.payload->value);
        else
            out.fact_indices = {pr.payload->value};
    }
    return out;
}

UpdateResult entry_update_hash(QuerySession& session, std::uint64_t bucket_id, std::uint32_t slot,
                               const BucketEntry& entry) {
    if (!session.pim.populated) throw StateError("update requires populated structures");
    const TableLayout& layout = session.pim.table.layout;
    if (bucket_id >= session.pim.table.buckets.size())
        throw ConfigError("bucket " + std::to_string(bucket_id) + " out of range");
    if (slot >= layout.bucket_capacity)
        throw ConfigError("slot " + std::to_string(slot) + " out of range");
    if (entry.tag > layout.tag_sentinel())
        throw ConfigError("tag wider than " + std::to_string(layout.tag_bits()) + " bits");
    if (entry.value >= (1ull << layout.value_bits))
        throw ConfigError("value wider than " + std::to_string(layout.value_bits) + " bits");

    BucketRow& row = session.pim.table.buckets[bucket_id];
    // Re-validate the unique-tag invariant before committing the write.
    if (entry.tag != layout.tag_sentinel()) {
        for (std::uint32_t i = 0; i < row.slots.size(); ++i) {
            if (i != slot && row.slots[i].tag == entry.tag)
                throw InvariantError("write would duplicate tag " + std::to_string(entry.tag) +
                                     " in bucket " + std::to_string(bucket_id));
        }
    }
    const bool was_occupied = slot_occupied(row, slot, layout);
    row.slots[slot] = entry;
    const bool now_occupied = slot_occupied(row, slot, layout);
    row.occupancy += (now_occupied ? 1 : 0) - (was_occupied ? 1 : 0);

    BankState& bank = session.rank_banks[0];
    UpdateResult r;
    const Cycles issue = bank.cycle_now;
    r.cycles = access_row(bank, map_bucket_to_location(bucket_id, session.geometry),
                          session.geometry, session.timing) +
               session.timing.burst_unit();
    bank.cycle_now = issue + r.cycles;
    r.applied = true;
    return r;
}

UpdateResult entry_update_fact(QuerySession& session, std::uint64_t fact_index,
                               std::uint64_t new_key) {
    if (!session.pim.populated) throw StateError("update requires populated structures");
    if (fact_index >= session.pim.fact_codes.size())
        throw CapacityError("fact index " + std::to_string(fact_index) + " out of range");
    const auto code = session.pim.dict.encode(new_key);
    session.pim.fact_codes[fact_index] = code ? *code : session.pim.dict.miss_code();

    const std::uint64_t row_index = fact_index / session.pim.keys_per_fact_row(session.geometry);
    BankState& bank = session.rank_banks[0];
    UpdateResult r;
    const Cycles issue = bank.cycle_now;
    r.cycles = access_row(bank, fact_row_location(row_index, session.geometry), session.geometry,
                          session.timing) +
               session.timing.burst_unit();
    bank.cycle_now = issue + r.cycles;
    r.applied = true;
    return r;
}

UpdateResult index_update(QuerySession& session, std::uint64_t key, std::uint64_t new_value) {
    if (!session.pim.populated) throw StateError("update requires populated structures");
    const TableLayout& layout = session.pim.table.layout;
    if (new_value >= (1ull << layout.value_bits))
        throw ConfigError("value wider than " + std::to_string(layout.value_bits) + " bits");

    BankState& bank = session.rank_banks[0];
    UpdateResult r;
    const auto code = session.pim.dict.encode(key);
    const std::uint64_t probe_code = code ? *code : session.pim.dict.miss_code();
    ProbeResult pr = probe(session.pim, probe_code, bank, session.timing, session.geometry);
    r.cycles = pr.cycles;
    if (!pr.payload) return r;  // miss: no change

    const std::uint64_t bucket = bucket_of(probe_code, layout.index_bits);
    const std::uint64_t tag = tag_of(probe_code, layout.index_bits);
    BucketRow& row = session.pim.table.buckets[bucket];
    for (BucketEntry& e : row.slots) {
        if (e.tag == tag) {
            e.value = new_value;  // dup flag preserved
            break;
        }
    }
    // Write-back burst; the probed row is open, so no second activation.
    const Cycles issue = bank.cycle_now;
    const Cycles wb = access_row(bank, map_bucket_to_location(bucket, session.geometry),
                                 session.geometry, session.timing) +
                      session.timing.burst_unit();
    bank.cycle_now = issue + wb;
    r.cycles += wb;
    r.applied = true;
    return r;
}

UpdateResult table_update(QuerySession& session, std::uint64_t start_index,
                          const std::vector<std::uint64_t>& new_keys) {
    if (!session.pim.populated) throw StateError("update requires populated structures");
    if (start_index + new_keys.size() > session.pim.fact_codes.size())
        throw CapacityError("table update of " + std::to_string(new_keys.size()) +
                            " entries at " + std::to_string(start_index) +
                            " overflows the fact column");
    UpdateResult r;
    if (new_keys.empty()) {
        r.applied = true;
        return r;
    }
    for (std::uint64_t i = 0; i < new_keys.size(); ++i) {
        const auto code = session.pim.dict.encode(new_keys[i]);
        session.pim.fact_codes[start_index + i] = code ? *code : session.pim.dict.miss_code();
    }

    const std::uint64_t keys_per_row = session.pim.keys_per_fact_row(session.geometry);
    const std::uint64_t keys_per_burst = session.pim.keys_per_fetch_burst(session.geometry);
    const std::uint64_t first_row = start_index / keys_per_row;
    const std::uint64_t last_row = (start_index + new_keys.size() - 1) / keys_per_row;
    BankState& bank = session.rank_banks[0];
    for (std::uint64_t row = first_row; row <= last_row; ++row) {
        const std::uint64_t row_begin = std::max(row * keys_per_row, start_index);
        const std::uint64_t row_end =
            std::min((row + 1) * keys_per_row, start_index + new_keys.size());
        const Cycles issue = bank.cycle_now;
        const Cycles c =
            access_row(bank, fact_row_location(row, session.geometry), session.geometry,
                       session.timing) +
            ceil_div(row_end - row_begin, keys_per_burst) * session.timing.burst_unit();
        bank.cycle_now = issue + c;
        r.cycles += c;
    }
    r.applied = true;
    return r;
}

}  // namespace jspim
