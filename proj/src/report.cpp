#include "jspim/report.hpp"

#include <fstream>
#include <sstream>

namespace jspim {

namespace {

std::string hex64(std::uint64_t v) {
    std::ostringstream ss;
    ss << "0x" << std::hex << v;
    return ss.str();
}

}  // namespace

ordered_json config_to_json(const SimConfig& cfg) {
    ordered_json j;
    std::istringstream dump(dump_config_string(cfg));
    std::string line;
    while (std::getline(dump, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key, eq;
        std::uint64_t value;
        ss >> key >> eq >> value;
        j[key] = value;
    }
    j["config_hash"] = hex64(config_hash(cfg));
    return j;
}

ordered_json workload_spec_to_json(const WorkloadSpec& spec) {
    ordered_json j;
    j["kind"] = spec.kind_name();
    if (spec.kind == WorkloadKind::SsbLike) {
        j["scale_factor"] = spec.scale_factor;
    } else {
        j["size_r"] = spec.size_r;
        j["multiplier"] = spec.multiplier;
        j["zipf_s"] = spec.zipf_s;
    }
    j["key_bits"] = spec.key_bits;
    j["seed"] = spec.seed;
    j["fk_run_length"] = spec.fk_run_length;
    j["miss_rate"] = spec.miss_rate;
    return j;
}

WorkloadSpec workload_spec_from_json(const ordered_json& j) {
    WorkloadSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ssb_like") {
        spec.kind = WorkloadKind::SsbLike;
        spec.scale_factor = j.at("scale_factor").get<double>();
    } else if (kind == "synthetic_pair") {
        spec.kind = WorkloadKind::SyntheticPair;
        spec.size_r = j.at("size_r").get<std::uint64_t>();
        spec.multiplier = j.at("multiplier").get<std::uint32_t>();
        spec.zipf_s = j.at("zipf_s").get<double>();
    } else {
        throw ConfigError("unknown workload kind: " + kind);
    }
    spec.key_bits = j.at("key_bits").get<std::uint32_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("fk_run_length")) spec.fk_run_length = j.at("fk_run_length").get<std::uint32_t>();
    if (j.contains("miss_rate")) spec.miss_rate = j.at("miss_rate").get<double>();
    spec.validate();
    return spec;
}

ordered_json latency_to_json(const LatencyReport& r, const TimingParams& t) {
    ordered_json j;
    j["total_cycles"] = r.total_cycles;
    j["seconds"] = t.cycles_to_seconds(r.total_cycles);
    j["per_rank_cycles"] = r.per_rank_cycles;
    j["population_cycles"] = r.population_cycles;
    j["expansion_rows"] = r.expansion_rows;
    j["host_expansion_cycles"] = r.host_expansion_cycles;
    ordered_json c;
    c["key_fetch_bursts"] = r.counts.key_fetch_bursts;
    c["probes_issued"] = r.counts.probes_issued;
    c["probes_coalesced"] = r.counts.probes_coalesced;
    c["row_activations"] = r.counts.row_activations;
    c["row_hits"] = r.counts.row_hits;
    c["results_returned"] = r.counts.results_returned;
    c["stall_cycles"] = r.counts.stall_cycles;
    j["pipeline"] = c;
    j["stage_busy_cycles"] = {r.stage_busy[0], r.stage_busy[1], r.stage_busy[2], r.stage_busy[3]};
    return j;
}

ordered_json run_report(const std::string& query, const SimConfig& cfg, const WorkloadSpec& spec,
                        std::uint64_t workload_fingerprint, const LatencyReport& latency,
                        std::uint64_t result_rows) {
    ordered_json j;
    j["tool"] = "jspim";
    j["report_version"] = 1;
    j["query"] = query;
    j["workload"] = workload_spec_to_json(spec);
    j["workload_hash"] = hex64(workload_fingerprint);
    j["config"] = config_to_json(cfg);
    j["result_rows"] = result_rows;
    j["latency"] = latency_to_json(latency, cfg.timing);
    return j;
}

ordered_json speedup_to_json(const SpeedupReport& r, const SimConfig& cfg,
                             const WorkloadSpec& spec) {
    ordered_json j;
    j["tool"] = "jspim";
    j["report_version"] = 1;
    j["kind"] = "compare";
    j["workload"] = workload_spec_to_json(spec);
    j["workload_hash"] = hex64(r.workload_hash);
    j["config"] = config_to_json(cfg);
    j["jspim_cycles"] = r.jspim_cycles;
    j["jspim_seconds"] = r.jspim_seconds;
    j["baseline_seconds"] = r.baseline_seconds;
    j["baseline_threads"] = r.baseline_threads;
    j["speedup"] = r.speedup;
    j["caveat"] = r.caveat;
    return j;
}

ordered_json overhead_to_json(const DataOverhead& o) {
    ordered_json j;
    j["dictionary_bytes"] = o.dictionary_bytes;
    j["encoded_fact_bytes"] = o.encoded_fact_bytes;
    j["hash_table_bytes"] = o.hash_table_bytes;
    j["duplication_bytes"] = o.duplication_bytes;
    j["total_bytes"] = o.total_bytes();
    j["raw_dataset_bytes"] = o.raw_dataset_bytes;
    j["ratio"] = o.ratio();
    return j;
}

std::string render_report(const ordered_json& j) { return j.dump(2) + "\n"; }

void write_report_file(const ordered_json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << render_report(j);
}

}  // namespace jspim
