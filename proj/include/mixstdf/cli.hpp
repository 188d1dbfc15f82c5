#pragma once

#include <iosfwd>

namespace mixstdf {

/// Entry point of the command-line tool. Returns 0 on success, 1 on a
/// runtime failure and 2 on usage or validation errors.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace mixstdf
