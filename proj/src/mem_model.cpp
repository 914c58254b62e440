#include "jspim/mem_model.hpp"

#include <string>

namespace jspim {

void MemoryGeometry::validate() const {
    auto need = [](std::uint64_t v, const char* name) {
        if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
    };
    need(channels, "channels");
    need(dimms_per_channel, "dimms_per_channel");
    need(ranks_per_dimm, "ranks_per_dimm");
    need(chips_per_rank, "chips_per_rank");
    need(banks_per_chip, "banks_per_chip");
    need(subarrays_per_bank, "subarrays_per_bank");
    need(rows_per_subarray, "rows_per_subarray");
    need(columns_per_row, "columns_per_row");
    need(chip_io_width, "chip_io_width");
    need(burst_length, "burst_length");
    if (pim_chips_per_rank != 1)
        throw ConfigError("pim_chips_per_rank is fixed at 1");
    if (chips_per_rank < 2)
        throw ConfigError("chips_per_rank must leave at least one regular chip");
    if (row_bits() == 0)
        throw ConfigError("row buffer width must be positive");
    if (columns_per_row % burst_length != 0)
        throw ConfigError("columns_per_row must be a multiple of burst_length");
    if (row_bits() % 8 != 0)
        throw ConfigError("row buffer width must be byte aligned");
}

void TimingParams::validate() const {
    if (t_cmp > 4) throw ConfigError("t_cmp must be in [0, 4]");
    if (clock_period_ps == 0) throw ConfigError("clock_period_ps must be positive");
}

void validate_location(const Location& loc, const MemoryGeometry& g) {
    auto check = [](std::uint64_t v, std::uint64_t bound, const char* name) {
        if (v >= bound)
            throw ConfigError(std::string("location ") + name + " " + std::to_string(v) +
                              " out of range (bound " + std::to_string(bound) + ")");
    };
    check(loc.channel, g.channels, "channel");
    check(loc.dimm, g.dimms_per_channel, "dimm");
    check(loc.rank, g.ranks_per_dimm, "rank");
    check(loc.chip, g.chips_per_rank, "chip");
    check(loc.bank, g.banks_per_chip, "bank");
    check(loc.subarray, g.subarrays_per_bank, "subarray");
    check(loc.row, g.rows_per_subarray, "row");
    check(loc.column_offset, g.row_bytes(), "column_offset");
}

std::uint64_t subarray_key(const Location& loc, const MemoryGeometry& g) {
    std::uint64_t k = loc.channel;
    k = k * g.dimms_per_channel + loc.dimm;
    k = k * g.ranks_per_dimm + loc.rank;
    k = k * g.chips_per_rank + loc.chip;
    k = k * g.banks_per_chip + loc.bank;
    k = k * g.subarrays_per_bank + loc.subarray;
    return k;
}

Cycles access_row(BankState& state, const Location& loc, const MemoryGeometry& g,
                  const TimingParams& t) {
    validate_location(loc, g);
    const std::uint64_t key = subarray_key(loc, g);
    Cycles cost = 0;
    auto it = state.open_rows.find(key);
    if (it == state.open_rows.end()) {
        cost = t.t_rcd + t.t_cas;
        state.open_rows.emplace(key, loc.row);
        state.activations++;
    } else if (it->second == loc.row) {
        cost = t.t_cas;
        state.row_hits++;
    } else {
        cost = t.t_rp + t.t_rcd + t.t_cas;
        it->second = loc.row;
        state.activations++;
        state.conflict_misses++;
    }
    state.cycle_now += cost;
    return cost;
}

Cycles burst_transfer_cycles(std::uint64_t words, std::uint32_t word_bits,
                             const MemoryGeometry& g, const TimingParams& t) {
    if (word_bits == 0) throw ConfigError("word width must be positive");
    if (words == 0) return 0;
    const std::uint64_t burst_bits = g.burst_bits();
    std::uint64_t bursts;
    if (word_bits <= burst_bits) {
        const std::uint64_t words_per_burst = burst_bits / word_bits;
        bursts = ceil_div(words, words_per_burst);
    } else {
        bursts = words * ceil_div(word_bits, burst_bits);
    }
    return bursts * t.burst_unit();
}

Location map_bucket_to_location(std::uint64_t bucket_id, const MemoryGeometry& g) {
    const std::uint64_t capacity = g.rows_per_chip();
    if (bucket_id >= capacity)
        throw CapacityError("bucket id " + std::to_string(bucket_id) +
                            " exceeds PIM row capacity " + std::to_string(capacity));
    Location loc;
    loc.chip = 0;  // PIM chip
    loc.bank = std::uint32_t(bucket_id % g.banks_per_chip);
    const std::uint64_t rest = bucket_id / g.banks_per_chip;
    loc.subarray = std::uint32_t(rest % g.subarrays_per_bank);
    loc.row = std::uint32_t(rest / g.subarrays_per_bank);
    return loc;
}

std::uint64_t location_to_bucket(const Location& loc, const MemoryGeometry& g) {
    validate_location(loc, g);
    return (std::uint64_t(loc.row) * g.subarrays_per_bank + loc.subarray) * g.banks_per_chip +
           loc.bank;
}

Location fact_row_location(std::uint64_t row_index, const MemoryGeometry& g) {
    if (row_index >= g.rows_per_chip())
        throw CapacityError("fact row " + std::to_string(row_index) +
                            " exceeds regular-chip row capacity " +
                            std::to_string(g.rows_per_chip()));
    Location loc;
    loc.chip = 1;  // representative regular chip; all regular chips move in lockstep
    loc.row = std::uint32_t(row_index % g.rows_per_subarray);
    const std::uint64_t rest = row_index / g.rows_per_subarray;
    loc.subarray = std::uint32_t(rest % g.subarrays_per_bank);
    loc.bank = std::uint32_t(rest / g.subarrays_per_bank);
    return loc;
}

std::uint64_t location_to_address(const Location& loc, const MemoryGeometry& g) {
    validate_location(loc, g);
    std::uint64_t a = loc.channel;
    a = a * g.dimms_per_channel + loc.dimm;
    a = a * g.ranks_per_dimm + loc.rank;
    a = a * g.chips_per_rank + loc.chip;
    a = a * g.banks_per_chip + loc.bank;
    a = a * g.subarrays_per_bank + loc.subarray;
    a = a * g.rows_per_subarray + loc.row;
    a = a * g.row_bytes() + loc.column_offset;
    return a;
}

Location address_to_location(std::uint64_t addr, const MemoryGeometry& g) {
    if (addr >= rlu_window_base(g))
        throw ConfigError("address 0x" + std::to_string(addr) + " is not a DRAM cell");
    Location loc;
    loc.column_offset = std::uint32_t(addr % g.row_bytes());
    addr /= g.row_bytes();
    loc.row = std::uint32_t(addr % g.rows_per_subarray);
    addr /= g.rows_per_subarray;
    loc.subarray = std::uint32_t(addr % g.subarrays_per_bank);
    addr /= g.subarrays_per_bank;
    loc.bank = std::uint32_t(addr % g.banks_per_chip);
    addr /= g.banks_per_chip;
    loc.chip = std::uint32_t(addr % g.chips_per_rank);
    addr /= g.chips_per_rank;
    loc.rank = std::uint32_t(addr % g.ranks_per_dimm);
    addr /= g.ranks_per_dimm;
    loc.dimm = std::uint32_t(addr % g.dimms_per_channel);
    addr /= g.dimms_per_channel;
    loc.channel = std::uint32_t(addr);
    return loc;
}

std::uint64_t rlu_window_base(const MemoryGeometry& g) {
    // One past the last DRAM byte: channel == channels.
    Location top;
    top.channel = g.channels - 1;
    top.dimm = g.dimms_per_channel - 1;
    top.rank = g.ranks_per_dimm - 1;
    top.chip = g.chips_per_rank - 1;
    top.bank = g.banks_per_chip - 1;
    top.subarray = g.subarrays_per_bank - 1;
    top.row = g.rows_per_subarray - 1;
    top.column_offset = std::uint32_t(g.row_bytes() - 1);
    return location_to_address(top, g) + 1;
}

std::uint64_t geometry_hash(const MemoryGeometry& g) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    mix(g.channels);
    mix(g.dimms_per_channel);
    mix(g.ranks_per_dimm);
    mix(g.chips_per_rank);
    mix(g.pim_chips_per_rank);
    mix(g.banks_per_chip);
    mix(g.subarrays_per_bank);
    mix(g.rows_per_subarray);
    mix(g.columns_per_row);
    mix(g.chip_io_width);
    mix(g.burst_length);
    return h;
}

std::uint32_t ceil_log2(std::uint64_t n) {
    std::uint32_t bits = 0;
    while ((1ull << bits) < n) ++bits;
    return bits;
}

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace jspim
