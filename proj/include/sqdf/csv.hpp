#pragma once

#include <fmt/format.h>

#include <string>

namespace sqdf {

/// Shortest round-trip decimal representation; stable across runs.
inline std::string csv_number(double x) { return fmt::format("{}", x); }

}  // namespace sqdf
