#pragma once

#include <string>

namespace vrcp {

/// Shortest decimal text that parses back to exactly `v` ("inf"/"nan" for
/// non-finite values).
std::string format_double(double v);

}  // namespace vrcp
