#pragma once

#include <iosfwd>

namespace sqdf {

/// Entry point of the `sqdf` tool. Returns 0 on success, 2 on configuration
/// or usage errors and 3 on numerical failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sqdf
