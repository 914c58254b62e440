#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "jspim/baseline.hpp"
#include "jspim/config.hpp"
#include "jspim/query_engine.hpp"
#include "jspim/workload.hpp"

namespace jspim {

using ordered_json = nlohmann::ordered_json;

// Report assembly. Every report embeds the resolved configuration and the
// workload fingerprint; equal fingerprints produce byte-identical JSON.
ordered_json config_to_json(const SimConfig& cfg);
ordered_json workload_spec_to_json(const WorkloadSpec& spec);
WorkloadSpec workload_spec_from_json(const ordered_json& j);
ordered_json latency_to_json(const LatencyReport& r, const TimingParams& t);
ordered_json run_report(const std::string& query, const SimConfig& cfg, const WorkloadSpec& spec,
                        std::uint64_t workload_fingerprint, const LatencyReport& latency,
                        std::uint64_t result_rows);
ordered_json speedup_to_json(const SpeedupReport& r, const SimConfig& cfg,
                             const WorkloadSpec& spec);
ordered_json overhead_to_json(const DataOverhead& o);

std::string render_report(const ordered_json& j);
void write_report_file(const ordered_json& j, const std::string& path);

}  // namespace jspim
