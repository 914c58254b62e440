#pragma once

#include <string>

#include "jspim/join_structures.hpp"

namespace jspim {

// Versioned binary dump of built structures: magic "JSPM", format version,
// geometry hash, then a section table (id, offset, size) covering the
// dictionary, hash table, duplication list, fact column, and workload
// fingerprint. Loading verifies magic, version, and geometry hash.
void save_structures(const PimState& pim, std::uint64_t workload_fingerprint,
                     const MemoryGeometry& g, const std::string& path);

struct LoadedStructures {
    PimState pim;
    std::uint64_t workload_fingerprint = 0;
};

LoadedStructures load_structures(const std::string& path, const MemoryGeometry& g);

}  // namespace jspim
