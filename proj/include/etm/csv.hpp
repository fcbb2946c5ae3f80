#pragma once

#include <charconv>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace etm::csv {

/// Shortest representation that parses back to the same double.
inline std::string format(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

inline void write_row(std::ostream& out, std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out << ',';
        out << format(v);
        first = false;
    }
    out << '\n';
}

inline void write_header(std::ostream& out, std::string_view header) { out << header << '\n'; }

} // namespace etm::csv
