#include "jspim/dump.hpp"

#include <cstring>
#include <fstream>

namespace jspim {

namespace {

constexpr char kMagic[4] = {'J', 'S', 'P', 'M'};
constexpr std::uint32_t kVersion = 1;

enum SectionId : std::uint32_t {
    kSectionDict = 1,
    kSectionTable = 2,
    kSectionDup = 3,
    kSectionFact = 4,
    kSectionMeta = 5,
};

struct SectionEntry {
    std::uint32_t id = 0;
    std::uint64_t offset = 0;
    std::uint64_t size = 0;
};

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    std::uint32_t u32() {
        if (pos + 4 > buf.size()) throw ConfigError("truncated dump");
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos++])) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        if (pos + 8 > buf.size()) throw ConfigError("truncated dump");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(std::uint8_t(buf[pos++])) << (8 * i);
        return v;
    }
};

std::string encode_dict(const Dictionary& d) {
    std::string s;
    put_u32(s, d.code_bits);
    put_u64(s, d.entries.size());
    for (const auto& [value, code] : d.entries) {
        put_u64(s, value);
        put_u64(s, code);
    }
    return s;
}

Dictionary decode_dict(Reader& r) {
    Dictionary d;
    d.code_bits = r.u32();
    const std::uint64_t n = r.u64();
    d.entries.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t value = r.u64();
        const std::uint64_t code = r.u64();
        d.entries.emplace_back(value, code);
        d.value_to_code.emplace(value, code);
        d.code_to_value.emplace(code, value);
    }
    return d;
}

std::string encode_table(const PimHashTable& t) {
    std::string s;
    put_u32(s, t.layout.code_bits);
    put_u32(s, t.layout.index_bits);
    put_u32(s, t.layout.value_bits);
    put_u32(s, t.layout.bucket_capacity);
    std::uint64_t non_empty = 0;
    for (const BucketRow& row : t.buckets) non_empty += row.empty() ? 0 : 1;
    put_u64(s, non_empty);
    for (const BucketRow& row : t.buckets) {
        if (row.empty()) continue;
        put_u64(s, row.bucket_id);
        put_u32(s, row.occupancy);
        for (std::uint32_t slot = 0; slot < row.slots.size(); ++slot) {
            if (!slot_occupied(row, slot, t.layout)) continue;
            put_u32(s, slot);
            put_u64(s, row.slots[slot].tag);
            put_u64(s, row.slots[slot].value);
            s.push_back(row.slots[slot].dup_flag ? 1 : 0);
        }
    }
    return s;
}

PimHashTable decode_table(Reader& r) {
    PimHashTable t;
    t.layout.code_bits = r.u32();
    t.layout.index_bits = r.u32();
    t.layout.value_bits = r.u32();
    t.layout.bucket_capacity = r.u32();
    t.buckets.reserve(t.layout.bucket_count());
    for (std::uint64_t b = 0; b < t.layout.bucket_count(); ++b)
        t.buckets.push_back(make_empty_row(b, t.layout));
    const std::uint64_t non_empty = r.u64();
    for (std::uint64_t i = 0; i < non_empty; ++i) {
        const std::uint64_t bucket_id = r.u64();
        if (bucket_id >= t.buckets.size()) throw ConfigError("dump bucket id out of range");
        BucketRow& row = t.buckets[bucket_id];
        const std::uint32_t occupancy = r.u32();
        for (std::uint32_t e = 0; e < occupancy; ++e) {
            const std::uint32_t slot = r.u32();
            if (slot >= row.slots.size()) throw ConfigError("dump slot out of range");
            BucketEntry entry;
            entry.tag = r.u64();
            entry.value = r.u64();
            if (r.pos >= r.buf.size()) throw ConfigError("truncated dump");
            entry.dup_flag = r.buf[r.pos++] != 0;
            row.slots[slot] = entry;
        }
        row.occupancy = occupancy;
    }
    return t;
}

std::string encode_dup(const DuplicationList& d) {
    std::string s;
    put_u64(s, d.lists.size());
    for (const auto& list : d.lists) {
        put_u64(s, list.size());
        for (std::uint64_t v : list) put_u64(s, v);
    }
    return s;
}

DuplicationList decode_dup(Reader& r) {
    DuplicationList d;
    const std::uint64_t n = r.u64();
    d.lists.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t len = r.u64();
        d.lists[i].reserve(len);
        for (std::uint64_t j = 0; j < len; ++j) d.lists[i].push_back(r.u64());
    }
    return d;
}

std::string encode_fact(const PimState& pim) {
    std::string s;
    put_u32(s, pim.fact_word_bits);
    put_u64(s, pim.fact_codes.size());
    for (std::uint64_t c : pim.fact_codes) put_u64(s, c);
    return s;
}

}  // namespace

void save_structures(const PimState& pim, std::uint64_t workload_fingerprint,
                     const MemoryGeometry& g, const std::string& path) {
    std::string sections[5] = {encode_dict(pim.dict), encode_table(pim.table),
                               encode_dup(pim.dup), encode_fact(pim), std::string()};
    put_u64(sections[4], workload_fingerprint);

    std::string header;
    header.append(kMagic, 4);
    put_u32(header, kVersion);
    put_u64(header, geometry_hash(g));
    put_u32(header, 5);

    const std::size_t table_size = 5 * (4 + 8 + 8);
    std::uint64_t offset = header.size() + table_size;
    std::string table;
    const std::uint32_t ids[5] = {kSectionDict, kSectionTable, kSectionDup, kSectionFact,
                                  kSectionMeta};
    for (int i = 0; i < 5; ++i) {
        put_u32(table, ids[i]);
        put_u64(table, offset);
        put_u64(table, sections[i].size());
        offset += sections[i].size();
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    out << header << table;
    for (const std::string& s : sections) out << s;
}

LoadedStructures load_structures(const std::string& path, const MemoryGeometry& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader r{buf};
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw ConfigError(path + " is not a jspim structure dump");
    r.pos = 4;
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw ConfigError("unsupported dump version " + std::to_string(version));
    const std::uint64_t ghash = r.u64();
    if (ghash != geometry_hash(g))
        throw ConfigError("geometry hash mismatch: dump was built for a different geometry");
    const std::uint32_t n_sections = r.u32();

    std::vector<SectionEntry> entries(n_sections);
    for (auto& e : entries) {
        e.id = r.u32();
        e.offset = r.u64();
        e.size = r.u64();
    }

    LoadedStructures out;
    for (const SectionEntry& e : entries) {
        Reader sr{buf};
        sr.pos = e.offset;
        switch (e.id) {
            case kSectionDict: out.pim.dict = decode_dict(sr); break;
            case kSectionTable: out.pim.table = decode_table(sr); break;
            case kSectionDup: out.pim.dup = decode_dup(sr); break;
            case kSectionFact: {
                out.pim.fact_word_bits = sr.u32();
                const std::uint64_t n = sr.u64();
                out.pim.fact_codes.reserve(n);
                for (std::uint64_t i = 0; i < n; ++i) out.pim.fact_codes.push_back(sr.u64());
                break;
            }
            case kSectionMeta: out.workload_fingerprint = sr.u64(); break;
            default: throw ConfigError("unknown dump section " + std::to_string(e.id));
        }
    }
    out.pim.populated = true;
    return out;
}

}  // namespace jspim
