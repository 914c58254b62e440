#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "jspim/mem_model.hpp"

namespace jspim {

// One memory-side event. Text form: "0x<addr> READ|WRITE <issue cycle>", one
// per line, '#' comments. Service cycles are not stored; a replayer derives
// them from the address alone:
//   - RLU window (addr >= rlu_window_base): one result burst
//   - PIM chip READ (chip 0): access_row + t_cmp (comparator pass)
//   - regular chip READ: access_row + one fetch burst
//   - WRITE: access_row + one burst (entry granularity)
struct TraceRecord {
    std::uint64_t address = 0;
    bool is_write = false;
    Cycles issue_cycle = 0;

    bool operator==(const TraceRecord&) const = default;
};

struct TraceRecorder {
    std::vector<TraceRecord> records;

    void read(std::uint64_t addr, Cycles issue) { records.push_back({addr, false, issue}); }
    void write(std::uint64_t addr, Cycles issue) { records.push_back({addr, true, issue}); }
    void sort_by_issue();
};

void write_trace(const std::vector<TraceRecord>& records, std::ostream& out);
void write_trace_file(const std::vector<TraceRecord>& records, const std::string& path);
std::vector<TraceRecord> read_trace_file(const std::string& path);

// Recomputes every record's service from the address stream (open-row state
// rebuilt per chip/subarray) and returns the largest completion cycle. For a
// traced run this equals the run's total_cycles exactly.
Cycles replay_trace(const std::vector<TraceRecord>& records, const MemoryGeometry& g,
                    const TimingParams& t);

}  // namespace jspim
