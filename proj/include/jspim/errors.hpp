#pragma once

#include <stdexcept>
#include <string>

namespace jspim {

// Bad or inconsistent configuration (geometry, timing, CLI flags, file formats).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A structure or range does not fit the configured device.
struct CapacityError : std::runtime_error {
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

// A structural invariant was violated (e.g. duplicate tags in a bucket row).
struct InvariantError : std::runtime_error {
    explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// Operation issued against a state that cannot accept it (unpopulated PIM, wrong mode).
struct StateError : std::runtime_error {
    explicit StateError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jspim
