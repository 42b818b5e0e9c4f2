#include "cht/format.hpp"

#include <cmath>
#include <cstdio>

namespace cht {

std::string format_real(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

}  // namespace cht
