#pragma once

#include <string>

namespace echosim {

/// Shortest decimal text that reads back to the same double; "nan" and
/// "inf"/"-inf" for non-finite values.
std::string format_double(double x);

}  // namespace echosim
