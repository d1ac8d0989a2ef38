#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace lipopt {

/// printf-style %.{digits}g, the form used by every file writer in the library.
inline std::string format_double(double v, int digits = 17)
{
    if (v == 0.0)
        v = 0.0; // drop the sign of -0
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

} // namespace lipopt
