#pragma once

#include <stdexcept>
#include <string>

namespace casc {

// Invalid user-supplied parameter or configuration value.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed, insufficient, or degenerate input data (tables, files).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace casc
