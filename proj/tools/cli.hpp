#pragma once

namespace klb::cli {

// Command-line entry point.  Exit codes: 0 success, 1 usage or numerical
// failure, 2 infeasible-problem outcome.
int run(int argc, const char* const* argv);

}  // namespace klb::cli
