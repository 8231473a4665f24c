#pragma once

#include <iosfwd>

namespace tabret {

/// Entry point of the `tabret` command line tool. Returns the process exit
/// code: 0 on success, 1 on a runtime failure, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tabret
