#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace croppat {

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Fraction rendered as a fixed two-decimal percentage, e.g. 0.9474 -> "94.74".
inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
    return buf;
}

}  // namespace croppat
