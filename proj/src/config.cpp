#include "jspim/config.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace jspim {

void SimConfig::validate() const {
    geometry.validate();
    timing.validate();
    if (rlu.coalesce_window < 1) throw ConfigError("coalesce_window must be >= 1");
    if (rlu.key_buffer_capacity < rlu.coalesce_window)
        throw ConfigError("key_buffer_capacity must be >= coalesce_window");
    if (ranks < 1 || ranks > geometry.total_ranks())
        throw ConfigError("ranks must lie in [1, " + std::to_string(geometry.total_ranks()) + "]");
}

SimConfig default_config() { return SimConfig{}; }

namespace {

struct KeyDoc {
    const char* key;
    const char* doc;
};

constexpr KeyDoc kKeyOrder[] = {
    {"channels", "memory channels"},
    {"dimms_per_channel", "DIMMs per channel"},
    {"ranks_per_dimm", "ranks per DIMM"},
    {"chips_per_rank", "DRAM chips per rank (DCR); one is the PIM chip"},
    {"pim_chips_per_rank", "fixed at 1"},
    {"banks_per_chip", "banks per chip"},
    {"subarrays_per_bank", "subarrays per bank"},
    {"rows_per_subarray", "rows per subarray"},
    {"columns_per_row", "column accesses per row"},
    {"chip_io_width", "bits per column per chip"},
    {"burst_length", "BL"},
    {"clock_period_ps", "memory clock period, picoseconds"},
    {"t_rcd", "activate-to-read, cycles"},
    {"t_rp", "precharge, cycles"},
    {"t_cas", "read latency, cycles"},
    {"t_cmp", "subarray comparator delay, cycles (0..4)"},
    {"burst_cycles", "cycles per data burst (BL/2)"},
    {"host_transfer_cycles", "extra channel cycles per burst"},
    {"key_buffer_capacity", "RLU key buffer entries"},
    {"coalesce_window", "coalescing window entries"},
    {"cpu_side_filter", "apply the window at stream generation too (0/1)"},
    {"ranks", "ranks driving a query in parallel"},
    {"host_expand_cycles_per_row", "host cost knob per expanded result row"},
};

std::uint64_t get_key(const SimConfig& c, const std::string& key) {
    if (key == "channels") return c.geometry.channels;
    if (key == "dimms_per_channel") return c.geometry.dimms_per_channel;
    if (key == "ranks_per_dimm") return c.geometry.ranks_per_dimm;
    if (key == "chips_per_rank") return c.geometry.chips_per_rank;
    if (key == "pim_chips_per_rank") return c.geometry.pim_chips_per_rank;
    if (key == "banks_per_chip") return c.geometry.banks_per_chip;
    if (key == "subarrays_per_bank") return c.geometry.subarrays_per_bank;
    if (key == "rows_per_subarray") return c.geometry.rows_per_subarray;
    if (key == "columns_per_row") return c.geometry.columns_per_row;
    if (key == "chip_io_width") return c.geometry.chip_io_width;
    if (key == "burst_length") return c.geometry.burst_length;
    if (key == "clock_period_ps") return c.timing.clock_period_ps;
    if (key == "t_rcd") return c.timing.t_rcd;
    if (key == "t_rp") return c.timing.t_rp;
    if (key == "t_cas") return c.timing.t_cas;
    if (key == "t_cmp") return c.timing.t_cmp;
    if (key == "burst_cycles") return c.timing.burst_cycles;
    if (key == "host_transfer_cycles") return c.timing.host_transfer_cycles;
    if (key == "key_buffer_capacity") return c.rlu.key_buffer_capacity;
    if (key == "coalesce_window") return c.rlu.coalesce_window;
    if (key == "cpu_side_filter") return c.rlu.cpu_side_filter ? 1 : 0;
    if (key == "ranks") return c.ranks;
    if (key == "host_expand_cycles_per_row") return c.host_expand_cycles_per_row;
    throw ConfigError("unknown config key: " + key);
}

}  // namespace

void apply_config_line(SimConfig& c, const std::string& key, std::uint64_t value) {
    auto u32 = [&] { return std::uint32_t(value); };
    if (key == "channels") c.geometry.channels = u32();
    else if (key == "dimms_per_channel") c.geometry.dimms_per_channel = u32();
    else if (key == "ranks_per_dimm") c.geometry.ranks_per_dimm = u32();
    else if (key == "chips_per_rank") c.geometry.chips_per_rank = u32();
    else if (key == "pim_chips_per_rank") c.geometry.pim_chips_per_rank = u32();
    else if (key == "banks_per_chip") c.geometry.banks_per_chip = u32();
    else if (key == "subarrays_per_bank") c.geometry.subarrays_per_bank = u32();
    else if (key == "rows_per_subarray") c.geometry.rows_per_subarray = u32();
    else if (key == "columns_per_row") c.geometry.columns_per_row = u32();
    else if (key == "chip_io_width") c.geometry.chip_io_width = u32();
    else if (key == "burst_length") c.geometry.burst_length = u32();
    else if (key == "clock_period_ps") c.timing.clock_period_ps = value;
    else if (key == "t_rcd") c.timing.t_rcd = value;
    else if (key == "t_rp") c.timing.t_rp = value;
    else if (key == "t_cas") c.timing.t_cas = value;
    else if (key == "t_cmp") c.timing.t_cmp = value;
    else if (key == "burst_cycles") c.timing.burst_cycles = value;
    else if (key == "host_transfer_cycles") c.timing.host_transfer_cycles = value;
    else if (key == "key_buffer_capacity") c.rlu.key_buffer_capacity = u32();
    else if (key == "coalesce_window") c.rlu.coalesce_window = u32();
    else if (key == "cpu_side_filter") c.rlu.cpu_side_filter = value != 0;
    else if (key == "ranks") c.ranks = u32();
    else if (key == "host_expand_cycles_per_row") c.host_expand_cycles_per_row = value;
    else throw ConfigError("unknown config key: " + key);
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    SimConfig cfg = default_config();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::stringstream ss(line);
        std::string key, eq;
        std::uint64_t value;
        if (!(ss >> key)) continue;  // blank line
        if (!(ss >> eq) || eq != "=" || !(ss >> value))
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected 'key = integer'");
        apply_config_line(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

void dump_config(const SimConfig& cfg, std::ostream& out) {
    out << "# jspim configuration (flat keys, integer values)\n";
    for (const KeyDoc& kd : kKeyOrder)
        out << kd.key << " = " << get_key(cfg, kd.key) << "  # " << kd.doc << '\n';
}

std::string dump_config_string(const SimConfig& cfg) {
    std::ostringstream ss;
    dump_config(cfg, ss);
    return ss.str();
}

std::uint64_t config_hash(const SimConfig& cfg) {
    std::uint64_t h = 14695981039346656037ull;
    for (const KeyDoc& kd : kKeyOrder) {
        const std::uint64_t v = get_key(cfg, kd.key);
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    }
    return h;
}

}  // namespace jspim
