#pragma once

#include <iostream>

namespace oac {

// Full command-line entry point. Cluster output goes to --out (or `out` when
// omitted); reports and diagnostics go to `err`. Returns 0 on success, 1 on
// runtime errors, 2 on usage errors.
int runCli(int argc, const char* const* argv, std::ostream& out = std::cout,
           std::ostream& err = std::cerr);

}  // namespace oac
