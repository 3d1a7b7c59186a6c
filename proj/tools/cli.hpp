#pragma once

#include <iosfwd>

namespace pothole {

/// Exit codes: 0 success, 1 processing error, 2 usage error.
int run_cli(int argc, const char* const* argv);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pothole
