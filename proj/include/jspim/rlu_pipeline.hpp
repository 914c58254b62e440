#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "jspim/join_structures.hpp"
#include "jspim/mem_model.hpp"

namespace jspim {

enum class RluMode { Dram, Pim };

enum class RluCommand : std::uint32_t {
    PimStart = 0x01,
    PimOff = 0x02,
    QueryJoin = 0x10,
    QuerySelectDistinct = 0x11,
    QuerySelectWhereEq = 0x12,
    EntryUpdate = 0x20,
    IndexUpdate = 0x21,
    TableUpdate = 0x22,
};

// Decodes the opcode word of a special-address write. Unknown opcodes are
// rejected.
RluCommand decode_command(std::uint32_t opcode_word);

// PimStart/PimOff switch the mode (idempotent); query and update opcodes
// leave it unchanged.
RluMode set_mode(RluMode current, RluCommand cmd);

struct RluConfig {
    std::uint32_t key_buffer_capacity = 128;
    std::uint32_t coalesce_window = 8;
    RluMode mode = RluMode::Pim;
    bool cpu_side_filter = false;  // apply the same window at stream generation
};

// N = key_buffer_capacity - ceil(keys per fetch burst), floored at 1: how many
// results must drain before the RLU resumes fetching once the buffer fills.
std::uint64_t compute_stall_N(const RluConfig& cfg, const MemoryGeometry& g,
                              std::uint32_t key_bits);

// Membership over the last `window` stream positions. Every incoming key is
// pushed (evicting the oldest); a key already present coalesces and reuses
// the prior result instead of probing.
class CoalesceWindow {
  public:
    explicit CoalesceWindow(std::uint32_t window) : window_(window) {}

    // True if key_code occurred within the last `window` positions. Records
    // the key either way.
    bool coalesce(std::uint64_t key_code);

  private:
    std::uint32_t window_;
    std::deque<std::uint64_t> recent_;
};

struct PipelineCounts {
    std::uint64_t key_fetch_bursts = 0;
    std::uint64_t probes_issued = 0;
    std::uint64_t probes_coalesced = 0;
    std::uint64_t row_activations = 0;  // PIM chip only
    std::uint64_t row_hits = 0;         // PIM chip only
    std::uint64_t results_returned = 0;
    std::uint64_t stall_cycles = 0;
};

// Whole-run accounting for one rank's pipeline. Stage order: S1 key fetch,
// S2 RLU buffer copy, S3 PIM probe, S4 result return.
struct PipelineTrace {
    PipelineCounts counts;
    Cycles stage_busy[4] = {0, 0, 0, 0};
    Cycles total_cycles = 0;
};

struct StreamResult {
    std::vector<std::optional<ProbePayload>> results;  // positional, one per input key
    PipelineTrace trace;
};

// Streams encoded fact keys through the four-stage pipeline: groups of keys
// are burst-fetched from the regular chips, copied into the RLU buffer
// (1 cycle per group), probed on the PIM chip, and returned one result burst
// each. Stages overlap; S1 stalls when the key buffer is full until stall_N
// results drain. In-window duplicate keys skip S3/S4 and copy the prior
// payload.
StreamResult run_join_stream(const PimState& pim, const std::vector<std::uint64_t>& fact_codes,
                             const RluConfig& cfg, const TimingParams& timing,
                             const MemoryGeometry& geometry, BankState& bank,
                             TraceRecorder* recorder = nullptr);

// Overlap composition used by run_double_buffered:
// load(0) + sum_i max(load(i+1), probe(i)) + probe(last).
Cycles compose_double_buffered(const std::vector<Cycles>& loads,
                               const std::vector<Cycles>& probes);

// Double-buffered execution over fact partitions: each partition's load
// overlaps the previous partition's probe phase.
struct DoubleBufferReport {
    std::vector<Cycles> load_cycles;
    std::vector<Cycles> probe_cycles;
    Cycles total_cycles = 0;
    std::vector<PipelineTrace> traces;
};
DoubleBufferReport run_double_buffered(const std::vector<std::vector<std::uint64_t>>& fact_partitions,
                                       const PimState& pim, const RluConfig& cfg,
                                       const TimingParams& timing, const MemoryGeometry& geometry);

}  // namespace jspim
