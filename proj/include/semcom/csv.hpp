#pragma once

// Deterministic CSV number formatting shared by every exporter, so a rerun
// with identical inputs produces byte-identical files.

#include <cstdio>
#include <string>

namespace semcom {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace semcom
