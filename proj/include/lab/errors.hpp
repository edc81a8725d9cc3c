#pragma once

#include <stdexcept>
#include <string>

namespace lab {

// Bad input: parameter out of its admissible range, mismatched sizes,
// grids that cannot bracket, etc.  Maps to process exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& what) : std::runtime_error(what) {}
};

// A computation that would exceed a declared memory/compute budget or a
// truncation tolerance.  Maps to process exit code 3.
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lab
