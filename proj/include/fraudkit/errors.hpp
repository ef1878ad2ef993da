#pragma once

#include <stdexcept>
#include <string>

namespace fraudkit {

// Bad flags, unusable paths, malformed configuration. CLI exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input data or model state that cannot be processed. CLI exit code 1.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fraudkit
