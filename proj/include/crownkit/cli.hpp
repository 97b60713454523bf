#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crownkit::cli {

/// Exit codes: 0 success, 1 validation error, 2 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crownkit::cli
