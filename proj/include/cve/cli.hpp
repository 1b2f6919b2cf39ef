#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace cve {

// Entry point of cv-entangle; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// %.17g with '.' as decimal separator.
std::string format_double(double v);

}  // namespace cve
