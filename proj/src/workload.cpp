#include "jspim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace jspim {

std::string WorkloadSpec::kind_name() const {
    return kind == WorkloadKind::SsbLike ? "ssb_like" : "synthetic_pair";
}

void WorkloadSpec::validate() const {
    if (kind == WorkloadKind::SsbLike) {
        if (scale_factor <= 0.0) throw ConfigError("scale_factor must be positive");
    } else {
        if (size_r == 0) throw ConfigError("size_r must be >= 1");
        if (size_r > (1ull << 32)) throw ConfigError("size_r exceeds the 32-bit key domain");
        if (multiplier != 1 && multiplier != 2 && multiplier != 4 && multiplier != 8)
            throw ConfigError("multiplier must be one of 1, 2, 4, 8");
    }
    if (zipf_s < 0.0 || zipf_s > 2.0) throw ConfigError("zipf_s must lie in [0, 2]");
    if (key_bits == 0 || key_bits > 64) throw ConfigError("key_bits must lie in [1, 64]");
    if (fk_run_length == 0) throw ConfigError("fk_run_length must be >= 1");
    if (miss_rate < 0.0 || miss_rate > 1.0) throw ConfigError("miss_rate must lie in [0, 1]");
}

const Column& Table::column(const std::string& name) const {
    for (const Column& c : columns)
        if (c.name == name) return c;
    throw ConfigError("table " + this->name + " has no column " + name);
}

SsbRowCounts ssb_row_counts(double sf) {
    if (sf <= 0.0) throw ConfigError("scale_factor must be positive");
    auto scaled = [sf](double base) { return std::uint64_t(std::llround(base * sf)); };
    SsbRowCounts c;
    c.lineorder = scaled(6000000.0);
    c.customer = scaled(30000.0);
    c.part = scaled(200000.0);
    c.supplier = scaled(2000.0);
    c.date = 2556;  // seven years of days, fixed
    if (c.lineorder == 0 || c.customer == 0 || c.part == 0 || c.supplier == 0)
        throw ConfigError("scale factor " + std::to_string(sf) +
                          " yields an empty table; workload is degenerate");
    return c;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // Rejection sampling keeps the draw unbiased and platform independent.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
        v = next();
    } while (v >= limit);
    return v % bound;
}

const Table& SsbWorkload::dimension(const std::string& name) const {
    if (name == "customer") return customer;
    if (name == "part") return part;
    if (name == "supplier") return supplier;
    if (name == "date") return date;
    throw ConfigError("unknown dimension table " + name);
}

std::string SsbWorkload::fk_column_for(const std::string& dimension) {
    if (dimension == "customer") return "custkey";
    if (dimension == "part") return "partkey";
    if (dimension == "supplier") return "suppkey";
    if (dimension == "date") return "datekey";
    throw ConfigError("unknown dimension table " + dimension);
}

namespace {

Table make_dimension(const std::string& name, std::uint64_t rows) {
    Table t;
    t.name = name;
    Column key;
    key.name = "key";
    key.values.resize(rows);
    for (std::uint64_t i = 0; i < rows; ++i) key.values[i] = i + 1;
    t.columns.push_back(std::move(key));
    return t;
}

// Foreign keys drawn uniformly from [1, dim_rows], with each drawn key
// repeated run_length times to model consecutive repetitions, and an optional
// miss fraction drawn outside the dimension domain.
Column make_fk_column(const std::string& name, std::uint64_t rows, std::uint64_t dim_rows,
                      std::uint32_t run_length, double miss_rate, Rng& rng) {
    Column c;
    c.name = name;
    c.values.reserve(rows);
    while (c.values.size() < rows) {
        std::uint64_t key;
        if (miss_rate > 0.0 && rng.unit() < miss_rate) {
            key = dim_rows + 1 + rng.below(dim_rows + 1);
        } else {
            key = 1 + rng.below(dim_rows);
        }
        for (std::uint32_t r = 0; r < run_length && c.values.size() < rows; ++r)
            c.values.push_back(key);
    }
    return c;
}

}  // namespace

SsbWorkload gen_ssb_like(const WorkloadSpec& spec) {
    spec.validate();
    if (spec.kind != WorkloadKind::SsbLike) throw ConfigError("spec is not ssb_like");
    const SsbRowCounts counts = ssb_row_counts(spec.scale_factor);

    SsbWorkload w;
    w.spec = spec;
    w.customer = make_dimension("customer", counts.customer);
    w.part = make_dimension("part", counts.part);
    w.supplier = make_dimension("supplier", counts.supplier);
    w.date = make_dimension("date", counts.date);

    Rng rng(spec.seed);
    w.lineorder.name = "lineorder";
    w.lineorder.columns.push_back(make_fk_column("custkey", counts.lineorder, counts.customer,
                                                 spec.fk_run_length, spec.miss_rate, rng));
    w.lineorder.columns.push_back(make_fk_column("partkey", counts.lineorder, counts.part,
                                                 spec.fk_run_length, spec.miss_rate, rng));
    w.lineorder.columns.push_back(make_fk_column("suppkey", counts.lineorder, counts.supplier,
                                                 spec.fk_run_length, spec.miss_rate, rng));
    w.lineorder.columns.push_back(make_fk_column("datekey", counts.lineorder, counts.date,
                                                 spec.fk_run_length, spec.miss_rate, rng));
    return w;
}

double zipf_harmonic(std::uint64_t n, double s) {
    double h = 0.0;
    for (std::uint64_t k = 1; k <= n; ++k) h += 1.0 / std::pow(double(k), s);
    return h;
}

std::vector<std::uint64_t> gen_zipf_keys(std::uint64_t n, double s, std::uint64_t domain_size,
                                         std::uint64_t seed) {
    if (n < 1 || domain_size < 1) throw ConfigError("zipf generation needs n >= 1, domain >= 1");
    if (s < 0.0) throw ConfigError("zipf exponent must be >= 0");

    // Inverse CDF over a precomputed cumulative table, exact at desk scale.
    std::vector<double> cdf(domain_size);
    double acc = 0.0;
    for (std::uint64_t k = 1; k <= domain_size; ++k) {
        acc += 1.0 / std::pow(double(k), s);
        cdf[k - 1] = acc;
    }
    const double total = acc;

    Rng rng(seed);
    std::vector<std::uint64_t> keys(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double u = rng.unit() * total;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        keys[i] = std::uint64_t(it - cdf.begin()) + 1;
    }
    return keys;
}

namespace {

// Distinct pseudo-random keys: a fixed-key bijective mix of 0..n-1 within the
// key domain, so generation is O(n) with no collision retries.
std::uint64_t mix_bijection(std::uint64_t x, std::uint32_t bits) {
    const std::uint64_t mask = bits == 64 ? ~0ull : (1ull << bits) - 1;
    x &= mask;
    for (int round = 0; round < 3; ++round) {
        x = (x * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull) & mask;
        x ^= x >> (bits / 2 + 1);
        x &= mask;
    }
    return x;
}

}  // namespace

SyntheticPair gen_synthetic_pair(const WorkloadSpec& spec) {
    spec.validate();
    if (spec.kind != WorkloadKind::SyntheticPair) throw ConfigError("spec is not synthetic_pair");

    SyntheticPair p;
    p.spec = spec;

    Rng rng(spec.seed);
    p.r.name = "R";
    Column rkey, rval;
    rkey.name = "key";
    rval.name = "value";
    rkey.values.resize(spec.size_r);
    rval.values.resize(spec.size_r);
    for (std::uint64_t i = 0; i < spec.size_r; ++i) {
        rkey.values[i] = mix_bijection(i, spec.key_bits);
        rval.values[i] = rng.next() & 0xFFFFFFFFull;
    }
    p.r.columns.push_back(std::move(rkey));
    p.r.columns.push_back(std::move(rval));

    const std::uint64_t s_rows = spec.size_r * spec.multiplier;
    const std::vector<std::uint64_t> ranks =
        gen_zipf_keys(s_rows, spec.zipf_s, spec.size_r, spec.seed ^ 0x5EEDF00Dull);
    p.s.name = "S";
    Column skey, sval;
    skey.name = "key";
    sval.name = "value";
    skey.values.resize(s_rows);
    sval.values.resize(s_rows);
    const Column& r_keys = p.r.columns[0];
    for (std::uint64_t i = 0; i < s_rows; ++i) {
        skey.values[i] = r_keys.values[ranks[i] - 1];
        sval.values[i] = rng.next() & 0xFFFFFFFFull;
    }
    p.s.columns.push_back(std::move(skey));
    p.s.columns.push_back(std::move(sval));
    return p;
}

std::uint64_t workload_hash(const WorkloadSpec& spec, const std::vector<const Table*>& tables) {
    std::uint64_t h = 14695981039346656037ull;
    auto mix_byte = [&h](std::uint8_t b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    auto mix = [&mix_byte](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) mix_byte(std::uint8_t(v >> (8 * i)));
    };
    auto mix_str = [&mix_byte](const std::string& s) {
        for (char c : s) mix_byte(std::uint8_t(c));
    };
    mix_str(spec.kind_name());
    mix(std::uint64_t(spec.scale_factor * 1e6));
    mix(spec.size_r);
    mix(spec.multiplier);
    mix(std::uint64_t(spec.zipf_s * 1e6));
    mix(spec.key_bits);
    mix(spec.seed);
    mix(spec.fk_run_length);
    mix(std::uint64_t(spec.miss_rate * 1e6));
    for (const Table* t : tables) {
        mix_str(t->name);
        for (const Column& c : t->columns) {
            mix_str(c.name);
            for (std::uint64_t v : c.values) mix(v);
        }
    }
    return h;
}

void write_table_csv(const Table& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i].name;
    out << '\n';
    const std::uint64_t rows = table.rows();
    for (std::uint64_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < table.columns.size(); ++i)
            out << (i ? "," : "") << table.columns[i].values[r];
        out << '\n';
    }
}

Table read_table_csv(const std::string& path, const std::string& name) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    Table t;
    t.name = name;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + " is empty");
    {
        std::stringstream header(line);
        std::string field;
        while (std::getline(header, field, ',')) t.columns.push_back(Column{field, {}});
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string field;
        std::size_t i = 0;
        while (std::getline(row, field, ',')) {
            if (i >= t.columns.size()) throw ConfigError(path + ": too many fields in a row");
            t.columns[i++].values.push_back(std::stoull(field));
        }
        if (i != t.columns.size()) throw ConfigError(path + ": short row");
    }
    return t;
}

}  // namespace jspim
