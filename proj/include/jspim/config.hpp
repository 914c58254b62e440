#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "jspim/mem_model.hpp"
#include "jspim/rlu_pipeline.hpp"

namespace jspim {

// Resolved simulator configuration. Read from a flat key = value file of
// integers; unknown keys are rejected.
struct SimConfig {
    MemoryGeometry geometry;
    TimingParams timing;
    RluConfig rlu;
    std::uint32_t ranks = 1;                 // ranks driving a query in parallel
    Cycles host_expand_cycles_per_row = 0;   // optional host-side expansion cost

    void validate() const;
};

SimConfig default_config();

// key = value lines, '#' comments. Unknown key or non-integer value raises
// ConfigError.
SimConfig load_config_file(const std::string& path);
void apply_config_line(SimConfig& cfg, const std::string& key, std::uint64_t value);

// Emits every key with its resolved value, in documented order.
void dump_config(const SimConfig& cfg, std::ostream& out);
std::string dump_config_string(const SimConfig& cfg);

std::uint64_t config_hash(const SimConfig& cfg);

}  // namespace jspim
