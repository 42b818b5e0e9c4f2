#pragma once

#include <string>

namespace cht {

/// Shortest-safe decimal form with 17 significant digits ("%.17g").
/// Infinities print as "inf"/"-inf".
std::string format_real(double value);

}  // namespace cht
