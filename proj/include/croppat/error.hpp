#pragma once

#include <stdexcept>
#include <string>

namespace croppat {

/// Malformed or inconsistent input data (bad CSV, dimension mismatch,
/// missing file, class constraints violated). CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numeric failure during computation (non-finite loss). CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad flag/config values detected before any computation. CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace croppat
