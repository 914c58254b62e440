#include "jspim/rlu_pipeline.hpp"

#include <algorithm>
#include <string>

#include "jspim/trace.hpp"

namespace jspim {

RluCommand decode_command(std::uint32_t opcode_word) {
    switch (opcode_word) {
        case std::uint32_t(RluCommand::PimStart):
        case std::uint32_t(RluCommand::PimOff):
        case std::uint32_t(RluCommand::QueryJoin):
        case std::uint32_t(RluCommand::QuerySelectDistinct):
        case std::uint32_t(RluCommand::QuerySelectWhereEq):
        case std::uint32_t(RluCommand::EntryUpdate):
        case std::uint32_t(RluCommand::IndexUpdate):
        case std::uint32_t(RluCommand::TableUpdate):
            return RluCommand(opcode_word);
        default:
            throw StateError("rejected command: unknown opcode 0x" + std::to_string(opcode_word));
    }
}

RluMode set_mode(RluMode current, RluCommand cmd) {
    switch (cmd) {
        case RluCommand::PimStart:
            return RluMode::Pim;
        case RluCommand::PimOff:
            return RluMode::Dram;
        default:
            return current;  // query/update opcodes leave the mode unchanged
    }
}

std::uint64_t compute_stall_N(const RluConfig& cfg, const MemoryGeometry& g,
                              std::uint32_t key_bits) {
    if (key_bits == 0) throw ConfigError("key width must be positive");
    const std::uint64_t burst_bits = g.burst_bits() * g.regular_chips();
    const std::uint64_t keys_per_burst = ceil_div(burst_bits, key_bits);
    if (keys_per_burst > cfg.key_buffer_capacity)
        throw ConfigError("key buffer (" + std::to_string(cfg.key_buffer_capacity) +
                          " entries) cannot hold one fetch burst of " +
                          std::to_string(keys_per_burst) + " keys");
    const std::uint64_t n = cfg.key_buffer_capacity - keys_per_burst;
    return n < 1 ? 1 : n;
}

bool CoalesceWindow::coalesce(std::uint64_t key_code) {
    const bool dup = std::find(recent_.begin(), recent_.end(), key_code) != recent_.end();
    recent_.push_back(key_code);
    if (recent_.size() > window_) recent_.pop_front();
    return dup;
}

StreamResult run_join_stream(const PimState& pim, const std::vector<std::uint64_t>& fact_codes,
                             const RluConfig& cfg, const TimingParams& timing,
                             const MemoryGeometry& geometry, BankState& bank,
                             TraceRecorder* recorder) {
    if (cfg.mode != RluMode::Pim) throw StateError("RLU is in DRAM mode; send PIM start first");
    if (!pim.populated) throw StateError("PIM state not populated");

    // Cooperative CPU-side filter: the same window applied at stream
    // generation, so in-window duplicates never consume fetch bursts or
    // buffer slots. The host copies their results back positionally.
    if (cfg.cpu_side_filter) {
        CoalesceWindow host_window(cfg.coalesce_window);
        std::vector<std::uint64_t> filtered;
        std::vector<std::size_t> origin;  // filtered position -> stream position
        filtered.reserve(fact_codes.size());
        std::unordered_map<std::uint64_t, std::size_t> last_kept;
        std::vector<std::size_t> copy_from(fact_codes.size(), SIZE_MAX);
        for (std::size_t i = 0; i < fact_codes.size(); ++i) {
            if (host_window.coalesce(fact_codes[i])) {
                copy_from[i] = last_kept.at(fact_codes[i]);
            } else {
                last_kept[fact_codes[i]] = filtered.size();
                origin.push_back(i);
                filtered.push_back(fact_codes[i]);
            }
        }
        RluConfig inner = cfg;
        inner.cpu_side_filter = false;
        StreamResult device = run_join_stream(pim, filtered, inner, timing, geometry, bank,
                                              recorder);
        StreamResult out;
        out.trace = device.trace;
        out.results.resize(fact_codes.size());
        for (std::size_t i = 0, f = 0; i < fact_codes.size(); ++i) {
            if (copy_from[i] == SIZE_MAX)
                out.results[i] = device.results[f++];
            else
                out.results[i] = device.results[copy_from[i]];
        }
        return out;
    }

    StreamResult out;
    out.results.resize(fact_codes.size());
    if (fact_codes.empty()) return out;

    const TableLayout& layout = pim.table.layout;
    const std::uint64_t keys_per_burst = pim.keys_per_fetch_burst(geometry);
    const std::uint64_t bursts_per_row = geometry.bursts_per_row();
    const std::uint64_t stall_n = compute_stall_N(cfg, geometry, pim.fact_word_bits);
    const std::uint64_t groups = ceil_div(fact_codes.size(), keys_per_burst);
    const Cycles result_burst = burst_transfer_cycles(1, layout.value_bits + 1, geometry, timing);
    const std::uint64_t window_base = rlu_window_base(geometry);

    PipelineCounts& counts = out.trace.counts;

    CoalesceWindow window(cfg.coalesce_window);
    // Last payload per key, so coalesced slots copy the reused result.
    std::unordered_map<std::uint64_t, std::optional<ProbePayload>> last_payload;

    // Stage clocks. A key leaves the RLU buffer when its probe issues, or at
    // copy completion if coalesced; leave_times is kept sorted so the stall
    // gate can count occupancy by binary search.
    Cycles s1_done = 0, s2_done = 0, s3_done = 0, s4_done = 0;
    std::vector<Cycles> leave_times;
    leave_times.reserve(fact_codes.size());
    std::vector<Cycles> s4_history;  // completion cycle of each returned result
    s4_history.reserve(fact_codes.size());

    std::uint64_t fetched_keys = 0;

    auto occupied_at = [&](Cycles t) {
        const std::uint64_t left =
            std::upper_bound(leave_times.begin(), leave_times.end(), t) - leave_times.begin();
        return fetched_keys - left;
    };

    for (std::uint64_t g = 0; g < groups; ++g) {
        const std::uint64_t first = g * keys_per_burst;
        const std::uint64_t last =
            std::min<std::uint64_t>(first + keys_per_burst, fact_codes.size());
        const std::uint64_t in_group = last - first;

        // S1: one burst fetch from the regular chips, gated on buffer space.
        Cycles fetch_start = s1_done;
        if (occupied_at(fetch_start) + in_group > cfg.key_buffer_capacity) {
            const std::uint64_t returned_by_start =
                std::upper_bound(s4_history.begin(), s4_history.end(), fetch_start) -
                s4_history.begin();
            std::uint64_t target =
                std::min<std::uint64_t>(returned_by_start + stall_n, s4_history.size());
            Cycles gated = target ? std::max(fetch_start, s4_history[target - 1]) : fetch_start;
            // Drain further (results, then any remaining buffer departures)
            // until the group fits.
            while (occupied_at(gated) + in_group > cfg.key_buffer_capacity) {
                if (target < s4_history.size()) {
                    gated = std::max(gated, s4_history[target++]);
                    continue;
                }
                const auto next_leave =
                    std::upper_bound(leave_times.begin(), leave_times.end(), gated);
                if (next_leave == leave_times.end()) break;
                gated = *next_leave;
            }
            counts.stall_cycles += gated - fetch_start;
            fetch_start = gated;
        }

        const Location row_loc = fact_row_location(g / bursts_per_row, geometry);
        Location burst_loc = row_loc;
        burst_loc.column_offset = std::uint32_t((g % bursts_per_row) * geometry.burst_length *
                                                geometry.chip_io_width / 8);
        const Cycles fetch_cost = access_row(bank, row_loc, geometry, timing) + timing.burst_unit();
        if (recorder) recorder->read(location_to_address(burst_loc, geometry), fetch_start);
        s1_done = fetch_start + fetch_cost;
        out.trace.stage_busy[0] += fetch_cost;
        counts.key_fetch_bursts++;
        fetched_keys += in_group;

        // S2: copy the fetched group into the RLU buffer.
        s2_done = std::max(s1_done, s2_done) + 1;
        out.trace.stage_busy[1] += 1;

        // S3 probe / S4 result return, per key of this group.
        const std::size_t group_leave_begin = leave_times.size();
        for (std::uint64_t i = first; i < last; ++i) {
            const std::uint64_t code = fact_codes[i];
            if (window.coalesce(code)) {
                counts.probes_coalesced++;
                out.results[i] = last_payload[code];
                leave_times.push_back(s2_done);
                continue;
            }
            const Cycles probe_start = std::max(s2_done, s3_done);
            leave_times.push_back(probe_start);

            const std::uint64_t bucket = bucket_of(code, layout.index_bits);
            const Location bucket_loc = map_bucket_to_location(bucket, geometry);
            const std::uint64_t acts_before = bank.activations;
            const std::uint64_t hits_before = bank.row_hits;
            const Cycles probe_cost = access_row(bank, bucket_loc, geometry, timing) + timing.t_cmp;
            counts.row_activations += bank.activations - acts_before;
            counts.row_hits += bank.row_hits - hits_before;
            if (recorder) recorder->read(location_to_address(bucket_loc, geometry), probe_start);
            s3_done = probe_start + probe_cost;
            out.trace.stage_busy[2] += probe_cost;

            const Cycles return_start = std::max(s3_done, s4_done);
            if (recorder) recorder->read(window_base, return_start);
            s4_done = return_start + result_burst;
            out.trace.stage_busy[3] += result_burst;
            s4_history.push_back(s4_done);

            const BucketRow& row = pim.table.buckets[bucket];
            const auto payload =
                match_select(compare_row(row, tag_of(code, layout.index_bits), layout), row);
            out.results[i] = payload;
            last_payload[code] = payload;
            counts.probes_issued++;
            counts.results_returned++;
        }
        // Keep leave_times globally sorted: coalesced departures at s2_done
        // interleave with probe starts.
        std::sort(leave_times.begin() + std::int64_t(group_leave_begin), leave_times.end());
        std::inplace_merge(leave_times.begin(),
                           leave_times.begin() + std::int64_t(group_leave_begin),
                           leave_times.end());
    }

    out.trace.total_cycles = std::max(s1_done, s4_done);
    return out;
}

DoubleBufferReport run_double_buffered(
    const std::vector<std::vector<std::uint64_t>>& fact_partitions, const PimState& pim,
    const RluConfig& cfg, const TimingParams& timing, const MemoryGeometry& geometry) {
    DoubleBufferReport report;
    if (fact_partitions.empty()) return report;

    const std::uint64_t capacity = pim.keys_per_fact_row(geometry) * geometry.rows_per_chip();
    for (const auto& part : fact_partitions) {
        if (part.size() > capacity)
            throw CapacityError("partition of " + std::to_string(part.size()) +
                                " keys exceeds PIM fact capacity " + std::to_string(capacity));
    }

    // Load cost of one partition: sequential whole-row burst writes.
    auto load_cost = [&](const std::vector<std::uint64_t>& part) -> Cycles {
        if (part.empty()) return 0;
        BankState bank;
        const std::uint64_t keys_per_row = pim.keys_per_fact_row(geometry);
        const std::uint64_t keys_per_burst = pim.keys_per_fetch_burst(geometry);
        const std::uint64_t rows = ceil_div(part.size(), keys_per_row);
        Cycles total = 0;
        for (std::uint64_t r = 0; r < rows; ++r) {
            const std::uint64_t in_row =
                std::min<std::uint64_t>(keys_per_row, part.size() - r * keys_per_row);
            total += access_row(bank, fact_row_location(r, geometry), geometry, timing) +
                     ceil_div(in_row, keys_per_burst) * timing.burst_unit();
        }
        return total;
    };

    for (const auto& part : fact_partitions) {
        report.load_cycles.push_back(load_cost(part));
        BankState bank;
        StreamResult r = run_join_stream(pim, part, cfg, timing, geometry, bank);
        report.probe_cycles.push_back(r.trace.total_cycles);
        report.traces.push_back(r.trace);
    }

    report.total_cycles = compose_double_buffered(report.load_cycles, report.probe_cycles);
    return report;
}

Cycles compose_double_buffered(const std::vector<Cycles>& loads,
                               const std::vector<Cycles>& probes) {
    if (loads.empty()) return 0;
    if (loads.size() != probes.size())
        throw ConfigError("load/probe phase lists differ in length");
    Cycles total = loads.front();
    for (std::size_t i = 0; i + 1 < loads.size(); ++i)
        total += std::max(loads[i + 1], probes[i]);
    total += probes.back();
    return total;
}

}  // namespace jspim
