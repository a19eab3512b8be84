#pragma once

#include <cstdio>
#include <string>

namespace gbeam {

/// Shortest-safe round-trip decimal: 17 significant digits, locale independent.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace gbeam
