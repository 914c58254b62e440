#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jspim/errors.hpp"

namespace jspim {

enum class WorkloadKind { SsbLike, SyntheticPair };

// Seed-reproducible description of a workload. ssb_like scales a star schema
// linearly; synthetic_pair draws S's keys from R's unique key set with Zipf
// skew s.
struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::SsbLike;
    double scale_factor = 0.01;
    std::uint64_t size_r = 500000;
    std::uint32_t multiplier = 1;  // |S| = multiplier * |R|
    double zipf_s = 0.0;
    std::uint32_t key_bits = 32;
    std::uint64_t seed = 1;
    std::uint32_t fk_run_length = 1;  // consecutive repeats of each drawn fact key
    double miss_rate = 0.0;           // fraction of fact keys outside the dimension

    std::string kind_name() const;
    void validate() const;
};

struct Column {
    std::string name;
    std::vector<std::uint64_t> values;
};

struct Table {
    std::string name;
    std::vector<Column> columns;

    std::uint64_t rows() const { return columns.empty() ? 0 : columns[0].values.size(); }
    const Column& column(const std::string& name) const;
};

struct SsbRowCounts {
    std::uint64_t lineorder = 0;
    std::uint64_t customer = 0;
    std::uint64_t part = 0;
    std::uint64_t supplier = 0;
    std::uint64_t date = 0;
};

// Row counts at a scale factor: lineorder 6,000,000 x sf, customer 30,000 x sf,
// part 200,000 x sf, supplier 2,000 x sf, date fixed at 2,556 (seven years).
SsbRowCounts ssb_row_counts(double sf);

struct SsbWorkload {
    WorkloadSpec spec;
    Table lineorder;  // columns: custkey, partkey, suppkey, datekey
    Table customer;   // column: key
    Table part;
    Table supplier;
    Table date;

    const Table& dimension(const std::string& name) const;
    static std::string fk_column_for(const std::string& dimension);
};

struct SyntheticPair {
    WorkloadSpec spec;
    Table r;  // columns: key (unique), value
    Table s;  // columns: key (drawn from r), value
};

// Deterministic RNG wrapper: identical streams on every platform (no
// std::*_distribution, whose outputs are implementation defined).
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}
    std::uint64_t next() { return eng(); }
    std::uint64_t below(std::uint64_t bound);          // uniform in [0, bound)
    double unit() { return double(next() >> 11) * 0x1.0p-53; }  // [0, 1)
};

SsbWorkload gen_ssb_like(const WorkloadSpec& spec);

// Zipf-distributed keys over [1, domain_size]: P(k) = k^-s / H(domain_size, s).
// s = 0 degenerates to uniform. Inverse-CDF over a precomputed table.
std::vector<std::uint64_t> gen_zipf_keys(std::uint64_t n, double s, std::uint64_t domain_size,
                                         std::uint64_t seed);

SyntheticPair gen_synthetic_pair(const WorkloadSpec& spec);

double zipf_harmonic(std::uint64_t n, double s);

// FNV-1a fingerprint over the spec fields and all generated column data.
std::uint64_t workload_hash(const WorkloadSpec& spec, const std::vector<const Table*>& tables);

void write_table_csv(const Table& table, const std::string& path);
Table read_table_csv(const std::string& path, const std::string& name);

}  // namespace jspim
