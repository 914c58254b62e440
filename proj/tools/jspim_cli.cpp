// jspim command-line harness: workload generation, structure builds, query
// runs, parameter sweeps, baseline comparison, and trace export.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "jspim/baseline.hpp"
#include "jspim/config.hpp"
#include "jspim/dump.hpp"
#include "jspim/query_engine.hpp"
#include "jspim/report.hpp"
#include "jspim/trace.hpp"
#include "jspim/workload.hpp"

namespace {

using namespace jspim;
namespace fs = std::filesystem;

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;
constexpr int kExitCapacity = 4;

struct WorkloadArgs {
    std::string workload = "ssb";
    double sf = 0.01;
    std::uint64_t size_r = 10000;
    std::uint32_t multiplier = 4;
    double zipf = 0.0;
    std::uint64_t seed = 1;
    std::uint32_t run_length = 1;
    double miss_rate = 0.0;
    std::string dim = "part";

    WorkloadSpec spec() const {
        WorkloadSpec s;
        if (workload == "ssb") {
            s.kind = WorkloadKind::SsbLike;
            s.scale_factor = sf;
        } else if (workload == "synthetic") {
            s.kind = WorkloadKind::SyntheticPair;
            s.size_r = size_r;
            s.multiplier = multiplier;
            s.zipf_s = zipf;
        } else {
            throw ConfigError("unknown workload kind: " + workload);
        }
        s.seed = seed;
        s.fk_run_length = run_length;
        s.miss_rate = miss_rate;
        s.validate();
        return s;
    }
};

void add_workload_flags(CLI::App* cmd, WorkloadArgs& args) {
    cmd->add_option("--workload", args.workload, "ssb | synthetic")
        ->check(CLI::IsMember({"ssb", "synthetic"}));
    cmd->add_option("--sf", args.sf, "ssb scale factor");
    cmd->add_option("--size-r", args.size_r, "synthetic |R|");
    cmd->add_option("--multiplier", args.multiplier, "synthetic |S| = m x |R|")
        ->check(CLI::IsMember({1, 2, 4, 8}));
    cmd->add_option("--zipf", args.zipf, "synthetic Zipf skew s");
    cmd->add_option("--seed", args.seed, "workload seed");
    cmd->add_option("--run-length", args.run_length, "consecutive repeats per drawn fact key");
    cmd->add_option("--miss-rate", args.miss_rate, "fraction of fact keys outside the dimension");
    cmd->add_option("--dim", args.dim, "ssb dimension to join (customer|part|supplier|date)")
        ->check(CLI::IsMember({"customer", "part", "supplier", "date"}));
}

SimConfig resolve_config(const std::string& config_path) {
    if (!config_path.empty()) return load_config_file(config_path);
    if (const char* env = std::getenv("JSPIM_CONFIG"); env && *env)
        return load_config_file(env);
    return default_config();
}

// One join column materialized from a workload spec.
struct Materialized {
    WorkloadSpec spec;
    std::string column;
    std::vector<std::uint64_t> fact;
    std::vector<std::uint64_t> dim;
    std::uint64_t fingerprint = 0;
};

Materialized materialize(const WorkloadSpec& spec, const std::string& dim_name) {
    Materialized m;
    m.spec = spec;
    if (spec.kind == WorkloadKind::SsbLike) {
        const SsbWorkload w = gen_ssb_like(spec);
        const Table& d = w.dimension(dim_name);
        m.column = SsbWorkload::fk_column_for(dim_name);
        m.fact = w.lineorder.column(m.column).values;
        m.dim = d.column("key").values;
        m.fingerprint = workload_hash(spec, {&w.lineorder, &d});
    } else {
        const SyntheticPair p = gen_synthetic_pair(spec);
        m.column = "key";
        m.fact = p.s.column("key").values;
        m.dim = p.r.column("key").values;
        m.fingerprint = workload_hash(spec, {&p.r, &p.s});
    }
    return m;
}

void emit(const ordered_json& report, const std::string& out_path) {
    if (out_path.empty())
        std::cout << render_report(report);
    else
        write_report_file(report, out_path);
}

// ---- config ---------------------------------------------------------------

int cmd_config_dump(const std::string& config_path, const std::string& out_path) {
    const SimConfig cfg = resolve_config(config_path);
    cfg.validate();
    if (out_path.empty()) {
        dump_config(cfg, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot open " + out_path);
        dump_config(cfg, out);
    }
    return 0;
}

// ---- gen ------------------------------------------------------------------

int cmd_gen(const WorkloadArgs& args, const std::string& out_dir) {
    const WorkloadSpec spec = args.spec();
    fs::create_directories(out_dir);
    ordered_json meta = workload_spec_to_json(spec);
    if (spec.kind == WorkloadKind::SsbLike) {
        const SsbWorkload w = gen_ssb_like(spec);
        for (const Table* t : {&w.lineorder, &w.customer, &w.part, &w.supplier, &w.date})
            write_table_csv(*t, (fs::path(out_dir) / (t->name + ".csv")).string());
        meta["workload_hash"] = workload_hash(
            spec, {&w.lineorder, &w.customer, &w.part, &w.supplier, &w.date});
    } else {
        const SyntheticPair p = gen_synthetic_pair(spec);
        write_table_csv(p.r, (fs::path(out_dir) / "r.csv").string());
        write_table_csv(p.s, (fs::path(out_dir) / "s.csv").string());
        meta["workload_hash"] = workload_hash(spec, {&p.r, &p.s});
    }
    write_report_file(meta, (fs::path(out_dir) / "spec.json").string());
    std::cout << "wrote workload to " << out_dir << "\n";
    return 0;
}

// ---- build ----------------------------------------------------------------

int cmd_build(const WorkloadArgs& args, const std::string& config_path,
              const std::string& out_path, const std::string& report_path) {
    const SimConfig cfg = resolve_config(config_path);
    cfg.validate();
    const Materialized m = materialize(args.spec(), args.dim);

    QuerySession s = build_session(m.fact, m.dim, cfg.geometry, cfg.timing, cfg.rlu, cfg.ranks);
    if (!out_path.empty()) save_structures(s.pim, m.fingerprint, cfg.geometry, out_path);

    ordered_json j;
    j["tool"] = "jspim";
    j["report_version"] = 1;
    j["kind"] = "build";
    j["workload"] = workload_spec_to_json(m.spec);
    j["column"] = m.column;
    j["config"] = config_to_json(cfg);
    j["dimension_rows"] = m.dim.size();
    j["fact_rows"] = m.fact.size();
    j["distinct_keys"] = s.pim.dict.size();
    j["duplication_lists"] = s.pim.dup.size();
    j["data_construction_ms"] = s.data_construction_ms;
    j["population_cycles"] = s.population_cycles;
    j["population_ms"] = cfg.timing.cycles_to_seconds(s.population_cycles) * 1e3;
    j["overhead"] = overhead_to_json(compute_data_overhead(m.spec, cfg.geometry));
    if (!out_path.empty()) j["structures"] = out_path;
    emit(j, report_path);
    return 0;
}

// ---- run ------------------------------------------------------------------

struct RunArtifacts {
    ordered_json report;
    std::vector<JoinRow> rows;
};

RunArtifacts execute_query(const SimConfig& cfg, const Materialized& m, const std::string& query,
                           std::uint64_t literal, TraceRecorder* recorder,
                           const std::string& structures_path) {
    QuerySession s;
    if (structures_path.empty()) {
        s = build_session(m.fact, m.dim, cfg.geometry, cfg.timing, cfg.rlu, cfg.ranks);
    } else {
        // Preloaded structures: no build or population this run.
        LoadedStructures loaded = load_structures(structures_path, cfg.geometry);
        if (loaded.workload_fingerprint != m.fingerprint)
            throw ConfigError("structure dump was built for a different workload");
        s.geometry = cfg.geometry;
        s.timing = cfg.timing;
        s.rlu = cfg.rlu;
        s.rlu.mode = set_mode(s.rlu.mode, RluCommand::PimStart);
        s.ranks = cfg.ranks;
        s.rank_banks.resize(cfg.ranks);
        s.pim = std::move(loaded.pim);
    }
    s.host_expand_cycles_per_row = cfg.host_expand_cycles_per_row;
    s.recorder = recorder;

    RunArtifacts art;
    if (query == "join") {
        JoinOutput out = join(s);
        art.report = run_report("join", cfg, m.spec, m.fingerprint, out.latency, out.rows.size());
        art.rows = std::move(out.rows);
    } else if (query == "distinct") {
        const DistinctOutput out = select_distinct(s);
        LatencyReport lat;
        lat.total_cycles = out.cycles;
        lat.population_cycles = s.population_cycles;
        lat.counts.row_activations = out.activations;
        art.report =
            run_report("distinct", cfg, m.spec, m.fingerprint, lat, out.values.size());
    } else if (query == "where-eq") {
        const WhereEqOutput out = select_where_eq(s, literal);
        LatencyReport lat;
        lat.total_cycles = out.cycles;
        lat.population_cycles = s.population_cycles;
        art.report = run_report("where-eq", cfg, m.spec, m.fingerprint, lat,
                                out.fact_indices.size());
        art.report["literal"] = literal;
    } else {
        throw ConfigError("unknown query: " + query);
    }
    return art;
}

void write_results_csv(const std::vector<JoinRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path);
    out << "key,fact_index,dim_index\n";
    for (const JoinRow& r : rows)
        out << r.key << ',' << r.fact_index << ',' << r.dim_index << '\n';
}

int cmd_run(const WorkloadArgs& args, const std::string& config_path, const std::string& query,
            std::uint64_t literal, const std::string& out_path, const std::string& results_path,
            const std::string& trace_path, const std::string& structures_path) {
    const SimConfig cfg = resolve_config(config_path);
    cfg.validate();
    const Materialized m = materialize(args.spec(), args.dim);

    TraceRecorder recorder;
    const bool tracing = !trace_path.empty();
    if (tracing && query != "join")
        throw ConfigError("--trace is supported for join runs");
    RunArtifacts art =
        execute_query(cfg, m, query, literal, tracing ? &recorder : nullptr, structures_path);
    if (tracing) {
        recorder.sort_by_issue();
        write_trace_file(recorder.records, trace_path);
        art.report["trace"] = trace_path;
    }
    if (!results_path.empty() && query == "join") write_results_csv(art.rows, results_path);
    emit(art.report, out_path);
    return 0;
}

// ---- sweep ----------------------------------------------------------------

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
}

std::vector<std::uint64_t> parse_range_or_list(const std::string& s) {
    const auto colon = s.find(':');
    std::vector<std::uint64_t> values;
    if (colon != std::string::npos) {
        const std::uint64_t lo = std::stoull(s.substr(0, colon));
        const std::uint64_t hi = std::stoull(s.substr(colon + 1));
        if (hi < lo) throw ConfigError("range " + s + " is reversed");
        for (std::uint64_t v = lo; v <= hi; ++v) values.push_back(v);
    } else {
        for (const auto& p : split_list(s)) values.push_back(std::stoull(p));
    }
    return values;
}

struct GridPoint {
    std::uint64_t t_cmp;
    double zipf;
    double sf;
    std::uint32_t ranks;
};

std::string sweep_row(const SimConfig& base_cfg, const WorkloadArgs& base_args,
                      const GridPoint& p) {
    SimConfig cfg = base_cfg;
    cfg.timing.t_cmp = p.t_cmp;
    cfg.ranks = p.ranks;
    cfg.validate();
    WorkloadArgs args = base_args;
    args.zipf = p.zipf;
    args.sf = p.sf;

    const Materialized m = materialize(args.spec(), args.dim);
    RunArtifacts art = execute_query(cfg, m, "join", 0, nullptr, "");
    const auto& r = art.report;
    const auto& lat = r.at("latency");
    const auto& pipe = lat.at("pipeline");
    std::ostringstream row;
    row << args.workload << ',' << p.sf << ',' << args.size_r << ',' << args.multiplier << ','
        << p.zipf << ',' << args.seed << ',' << args.dim << ',' << p.ranks << ',' << p.t_cmp
        << ',' << lat.at("total_cycles").get<std::uint64_t>() << ','
        << lat.at("seconds").get<double>() << ','
        << lat.at("population_cycles").get<std::uint64_t>() << ','
        << pipe.at("probes_issued").get<std::uint64_t>() << ','
        << pipe.at("probes_coalesced").get<std::uint64_t>() << ','
        << pipe.at("row_activations").get<std::uint64_t>() << ','
        << pipe.at("row_hits").get<std::uint64_t>() << ','
        << pipe.at("key_fetch_bursts").get<std::uint64_t>() << ','
        << pipe.at("stall_cycles").get<std::uint64_t>() << ','
        << r.at("result_rows").get<std::uint64_t>() << ','
        << r.at("workload_hash").get<std::string>();
    return row.str();
}

int cmd_sweep(const WorkloadArgs& args, const std::string& config_path, const std::string& tcmp,
              const std::string& zipf, const std::string& sf, const std::string& ranks,
              unsigned jobs, const std::string& out_path) {
    const SimConfig base = resolve_config(config_path);
    base.validate();

    std::vector<std::uint64_t> tcmp_values = {base.timing.t_cmp};
    if (!tcmp.empty()) tcmp_values = parse_range_or_list(tcmp);
    std::vector<double> zipf_values = {args.zipf};
    if (!zipf.empty()) {
        zipf_values.clear();
        for (const auto& p : split_list(zipf)) zipf_values.push_back(std::stod(p));
    }
    std::vector<double> sf_values = {args.sf};
    if (!sf.empty()) {
        sf_values.clear();
        for (const auto& p : split_list(sf)) sf_values.push_back(std::stod(p));
    }
    std::vector<std::uint64_t> rank_values = {base.ranks};
    if (!ranks.empty()) rank_values = parse_range_or_list(ranks);

    std::vector<GridPoint> grid;
    for (const std::uint64_t t : tcmp_values)
        for (const double z : zipf_values)
            for (const double s : sf_values)
                for (const std::uint64_t r : rank_values)
                    grid.push_back(GridPoint{t, z, s, std::uint32_t(r)});

    std::vector<std::string> rows(grid.size());
    if (jobs < 1) jobs = 1;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            rows[i] = sweep_row(base, args, grid[i]);
        }
    };
    std::vector<std::future<void>> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.push_back(std::async(std::launch::async, worker));
    worker();
    for (auto& f : pool) f.get();

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw ConfigError("cannot open " + out_path);
        out = &file;
    }
    *out << "workload,sf,size_r,multiplier,zipf,seed,dim,ranks,t_cmp,total_cycles,seconds,"
            "population_cycles,probes_issued,probes_coalesced,row_activations,row_hits,"
            "key_fetch_bursts,stall_cycles,result_rows,workload_hash\n";
    for (const std::string& row : rows) *out << row << '\n';
    return 0;
}

// ---- compare --------------------------------------------------------------

int cmd_compare(const WorkloadArgs& args, const std::string& config_path,
                const std::string& out_path) {
    const SimConfig cfg = resolve_config(config_path);
    cfg.validate();
    const Materialized m = materialize(args.spec(), args.dim);

    QuerySession s = build_session(m.fact, m.dim, cfg.geometry, cfg.timing, cfg.rlu, cfg.ranks);
    const JoinOutput out = join(s);
    const HashJoinRun sw = classic_hash_join(m.fact, m.dim);
    if (sw.rows.size() != out.rows.size())
        throw InvariantError("software and modeled joins disagree on row count");

    const SpeedupReport sr =
        compare_runs(m.fingerprint, out.latency.total_cycles, m.fingerprint, sw.wall_seconds,
                     sw.threads, cfg.timing);
    emit(speedup_to_json(sr, cfg, m.spec), out_path);
    return 0;
}

// ---- trace ----------------------------------------------------------------

int cmd_trace(const WorkloadArgs& args, const std::string& config_path,
              const std::string& out_path, bool verify) {
    const SimConfig cfg = resolve_config(config_path);
    cfg.validate();
    const Materialized m = materialize(args.spec(), args.dim);

    TraceRecorder recorder;
    RunArtifacts art = execute_query(cfg, m, "join", 0, &recorder, "");
    recorder.sort_by_issue();
    write_trace_file(recorder.records, out_path);

    const std::uint64_t total = art.report["latency"]["total_cycles"].get<std::uint64_t>();
    std::cout << "wrote " << recorder.records.size() << " records to " << out_path << "\n";
    if (verify) {
        const Cycles replayed = replay_trace(read_trace_file(out_path), cfg.geometry, cfg.timing);
        if (replayed != total)
            throw InvariantError("trace replay got " + std::to_string(replayed) +
                                 " cycles, run reported " + std::to_string(total));
        std::cout << "replay reproduces total_cycles = " << replayed << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jspim: cycle-approximate simulator for a subarray-level PIM join accelerator"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path,
                   "config file (flat key = value); default $JSPIM_CONFIG or built-ins");

    // config dump
    auto* config_cmd = app.add_subcommand("config", "configuration utilities");
    config_cmd->require_subcommand(1);
    auto* dump_cmd = config_cmd->add_subcommand("dump", "print the resolved configuration");
    std::string dump_out;
    dump_cmd->add_option("--out", dump_out, "write to a file instead of stdout");

    // gen
    auto* gen_cmd = app.add_subcommand("gen", "generate a workload as CSV + spec.json");
    WorkloadArgs gen_args;
    add_workload_flags(gen_cmd, gen_args);
    std::string gen_out;
    gen_cmd->add_option("--out", gen_out, "output directory")->required();

    // build
    auto* build_cmd =
        app.add_subcommand("build", "build join structures; report setup latency");
    WorkloadArgs build_args;
    add_workload_flags(build_cmd, build_args);
    std::string build_out, build_report;
    build_cmd->add_option("--out", build_out, "structure dump file");
    build_cmd->add_option("--report", build_report, "write the build report to a file");

    // run
    auto* run_cmd = app.add_subcommand("run", "execute a query and emit a JSON report");
    WorkloadArgs run_args;
    add_workload_flags(run_cmd, run_args);
    std::string run_query = "join", run_out, run_results, run_trace, run_structures;
    std::uint64_t run_literal = 1;
    run_cmd->add_option("--query", run_query, "join | distinct | where-eq")
        ->check(CLI::IsMember({"join", "distinct", "where-eq"}));
    run_cmd->add_option("--literal", run_literal, "where-eq literal");
    run_cmd->add_option("--out", run_out, "report file (default stdout)");
    run_cmd->add_option("--results", run_results, "join results CSV");
    run_cmd->add_option("--trace", run_trace, "export per-access trace (join only)");
    run_cmd->add_option("--structures", run_structures, "reuse a structure dump");

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter grid into one CSV");
    WorkloadArgs sweep_args;
    add_workload_flags(sweep_cmd, sweep_args);
    std::string sweep_tcmp, sweep_zipf, sweep_sf, sweep_ranks, sweep_out;
    unsigned sweep_jobs = 1;
    sweep_cmd->add_option("--tcmp", sweep_tcmp, "t_cmp values, e.g. 0:4 or 0,2,4");
    sweep_cmd->add_option("--zipf-list", sweep_zipf, "Zipf values, e.g. 0,0.5,1.5,2");
    sweep_cmd->add_option("--sf-list", sweep_sf, "scale factors, e.g. 0.001,0.01");
    sweep_cmd->add_option("--ranks", sweep_ranks, "rank counts, e.g. 1,2");
    sweep_cmd->add_option("--jobs", sweep_jobs, "parallel grid points");
    sweep_cmd->add_option("--out", sweep_out, "CSV file (default stdout)");

    // compare
    auto* compare_cmd =
        app.add_subcommand("compare", "modeled join vs measured software hash join");
    WorkloadArgs compare_args;
    add_workload_flags(compare_cmd, compare_args);
    std::string compare_out;
    compare_cmd->add_option("--out", compare_out, "report file (default stdout)");

    // trace
    auto* trace_cmd = app.add_subcommand("trace", "run a join with per-access trace export");
    WorkloadArgs trace_args;
    add_workload_flags(trace_cmd, trace_args);
    std::string trace_out;
    bool trace_verify = false;
    trace_cmd->add_option("--out", trace_out, "trace file")->required();
    trace_cmd->add_flag("--verify", trace_verify, "replay the trace and check total_cycles");

    try {
        app.parse(argc, argv);
        if (dump_cmd->parsed()) return cmd_config_dump(config_path, dump_out);
        if (gen_cmd->parsed()) return cmd_gen(gen_args, gen_out);
        if (build_cmd->parsed())
            return cmd_build(build_args, config_path, build_out, build_report);
        if (run_cmd->parsed())
            return cmd_run(run_args, config_path, run_query, run_literal, run_out, run_results,
                           run_trace, run_structures);
        if (sweep_cmd->parsed())
            return cmd_sweep(sweep_args, config_path, sweep_tcmp, sweep_zipf, sweep_sf,
                             sweep_ranks, sweep_jobs, sweep_out);
        if (compare_cmd->parsed()) return cmd_compare(compare_args, config_path, compare_out);
        if (trace_cmd->parsed())
            return cmd_trace(trace_args, config_path, trace_out, trace_verify);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return 0;  // --help
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const StateError& e) {
        std::cerr << "state error: " << e.what() << "\n";
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
