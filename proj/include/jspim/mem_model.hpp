#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>

#include "jspim/errors.hpp"

namespace jspim {

using Cycles = std::uint64_t;

// Shape of the simulated memory system. One chip per rank is the PIM chip
// (subarray comparators); the remaining chips_per_rank-1 chips hold the
// fact-key column. All counts are per the containing level.
struct MemoryGeometry {
    std::uint32_t channels = 8;
    std::uint32_t dimms_per_channel = 2;
    std::uint32_t ranks_per_dimm = 1;
    std::uint32_t chips_per_rank = 16;      // DCR
    std::uint32_t pim_chips_per_rank = 1;   // fixed
    std::uint32_t banks_per_chip = 16;
    std::uint32_t subarrays_per_bank = 128;
    std::uint32_t rows_per_subarray = 512;
    std::uint32_t columns_per_row = 1024;   // column accesses per row
    std::uint32_t chip_io_width = 8;        // bits per column per chip
    std::uint32_t burst_length = 8;         // BL

    // Derived quantities.
    std::uint64_t row_bits() const { return std::uint64_t(columns_per_row) * chip_io_width; }
    std::uint64_t row_bytes() const { return row_bits() / 8; }
    std::uint64_t burst_bits() const { return std::uint64_t(burst_length) * chip_io_width; }
    std::uint32_t bursts_per_row() const { return columns_per_row / burst_length; }
    std::uint32_t regular_chips() const { return chips_per_rank - pim_chips_per_rank; }
    std::uint64_t rows_per_chip() const {
        return std::uint64_t(banks_per_chip) * subarrays_per_bank * rows_per_subarray;
    }
    std::uint32_t total_ranks() const { return channels * dimms_per_channel * ranks_per_dimm; }

    void validate() const;
};

// DRAM timing in memory-clock cycles, plus the comparator delay t_cmp charged
// on PIM-chip reads.
struct TimingParams {
    std::uint64_t clock_period_ps = 1250;  // DDR4-3200
    Cycles t_rcd = 22;
    Cycles t_rp = 22;
    Cycles t_cas = 22;
    Cycles t_cmp = 1;                      // comparator delay, 0..4
    Cycles burst_cycles = 4;               // BL/2 (double data rate)
    Cycles host_transfer_cycles = 0;       // extra channel cycles per burst

    Cycles burst_unit() const { return burst_cycles + host_transfer_cycles; }
    double cycles_to_seconds(Cycles c) const { return double(c) * double(clock_period_ps) * 1e-12; }
    void validate() const;
};

// Fully decomposed device coordinate.
struct Location {
    std::uint32_t channel = 0;
    std::uint32_t dimm = 0;
    std::uint32_t rank = 0;
    std::uint32_t chip = 0;  // 0 = PIM chip, 1.. = regular chips
    std::uint32_t bank = 0;
    std::uint32_t subarray = 0;
    std::uint32_t row = 0;
    std::uint32_t column_offset = 0;  // byte offset within the per-chip row

    bool operator==(const Location&) const = default;
};

void validate_location(const Location& loc, const MemoryGeometry& g);

// Open-row state per (channel, dimm, rank, chip, bank, subarray) plus running
// counters. cycle_now accumulates charged service cycles; pipelined callers
// keep their own clocks and treat it as a total-work counter.
struct BankState {
    std::unordered_map<std::uint64_t, std::uint32_t> open_rows;
    Cycles cycle_now = 0;
    std::uint64_t activations = 0;
    std::uint64_t row_hits = 0;
    std::uint64_t conflict_misses = 0;

    void reset() { *this = BankState{}; }
};

std::uint64_t subarray_key(const Location& loc, const MemoryGeometry& g);

// Charges one row access at loc: t_cas on a row hit, t_rcd+t_cas when the
// subarray has no open row, t_rp+t_rcd+t_cas on a conflict. Updates the open
// row and advances cycle_now.
Cycles access_row(BankState& state, const Location& loc, const MemoryGeometry& g,
                  const TimingParams& t);

// Cycles to move `words` values of `word_bits` each over the chip interface:
// ceil(words / words_per_burst) bursts, each costing burst_cycles +
// host_transfer_cycles. Words wider than one burst take multiple bursts each.
Cycles burst_transfer_cycles(std::uint64_t words, std::uint32_t word_bits,
                             const MemoryGeometry& g, const TimingParams& t);

// Bucket-id -> PIM-chip row placement. Buckets stripe across banks first,
// then subarrays, then rows, so consecutive buckets activate in parallel.
Location map_bucket_to_location(std::uint64_t bucket_id, const MemoryGeometry& g);
std::uint64_t location_to_bucket(const Location& loc, const MemoryGeometry& g);

// Sequential fact-column row placement on the regular chips: rows fill a
// subarray top to bottom, then the next subarray, then the next bank.
Location fact_row_location(std::uint64_t row_index, const MemoryGeometry& g);

// Linear byte-address codec used by the trace format. Bit layout, high to
// low: channel | dimm | rank | chip | bank | subarray | row | byte-in-row.
// Addresses at or above rlu_window_base() address the per-rank RLU result
// window instead of a DRAM cell.
std::uint64_t location_to_address(const Location& loc, const MemoryGeometry& g);
Location address_to_location(std::uint64_t addr, const MemoryGeometry& g);
std::uint64_t rlu_window_base(const MemoryGeometry& g);

// FNV-1a over the geometry fields; dumps embed it to reject stale files.
std::uint64_t geometry_hash(const MemoryGeometry& g);

std::uint32_t ceil_log2(std::uint64_t n);
std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b);

}  // namespace jspim
