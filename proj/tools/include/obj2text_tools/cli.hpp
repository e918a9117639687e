#pragma once

#include <iosfwd>

namespace obj2text::tools {

/// Entry point of the obj2text command-line tool. Returns the process exit
/// status; diagnostics go to `err`. Output files are written atomically.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace obj2text::tools
