#include "jspim/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace jspim {

void TraceRecorder::sort_by_issue() {
    std::stable_sort(records.begin(), records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) {
                         return a.issue_cycle < b.issue_cycle;
                     });
}

void write_trace(const std::vector<TraceRecord>& records, std::ostream& out) {
    out << "# jspim memory trace v1: <hex byte address> <READ|WRITE> <issue cycle>\n";
    for (const TraceRecord& r : records) {
        char addr[32];
        std::snprintf(addr, sizeof(addr), "0x%llx", static_cast<unsigned long long>(r.address));
        out << addr << ' ' << (r.is_write ? "WRITE" : "READ") << ' ' << r.issue_cycle << '\n';
    }
}

void write_trace_file(const std::vector<TraceRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_trace(records, out);
}

std::vector<TraceRecord> read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<TraceRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string addr, op;
        Cycles cycle;
        if (!(ss >> addr >> op >> cycle)) throw ConfigError("malformed trace line: " + line);
        TraceRecord r;
        r.address = std::stoull(addr, nullptr, 16);
        if (op == "READ")
            r.is_write = false;
        else if (op == "WRITE")
            r.is_write = true;
        else
            throw ConfigError("malformed trace op: " + op);
        r.issue_cycle = cycle;
        records.push_back(r);
    }
    return records;
}

Cycles replay_trace(const std::vector<TraceRecord>& records, const MemoryGeometry& g,
                    const TimingParams& t) {
    const std::uint64_t window_base = rlu_window_base(g);
    BankState bank;
    Cycles last_completion = 0;
    for (const TraceRecord& r : records) {
        Cycles service = 0;
        if (r.address >= window_base) {
            service = t.burst_unit();  // RLU result window: one burst over the channel
        } else {
            const Location loc = address_to_location(r.address, g);
            service = access_row(bank, loc, g, t);
            if (r.is_write) {
                service += t.burst_unit();
            } else if (loc.chip == 0) {
                service += t.t_cmp;  // PIM-chip read passes the comparators
            } else {
                service += t.burst_unit();  // regular-chip read bursts the data out
            }
        }
        last_completion = std::max(last_completion, r.issue_cycle + service);
    }
    return last_completion;
}

}  // namespace jspim
