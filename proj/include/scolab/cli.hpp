#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scolab {

/**
 * Entry point of the `scolab` tool. Returns the process exit code:
 * 0 on success, 2 on usage or validation errors, 1 when an --assert check
 * fails or an output file cannot be written. Data goes to `out` or to files
 * under --out; diagnostics go to `err`.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scolab
