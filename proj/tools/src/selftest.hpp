#pragma once

#include <iosfwd>

namespace qpaths::tool {

/// Fast property checks that need no input files. Returns true when all pass.
bool run_selftest(std::ostream& out, bool quiet);

}  // namespace qpaths::tool
