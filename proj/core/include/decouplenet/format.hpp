#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace dcn {

// Shortest decimal string that round-trips to the same double. Keeps every
// serialized artifact (CSV, net files, spec strings) byte-deterministic.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace dcn
