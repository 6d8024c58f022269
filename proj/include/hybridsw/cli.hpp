#ifndef HYBRIDSW_CLI_HPP_
#define HYBRIDSW_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace hybridsw::cli {

/// Runs one command line (args[0] is the program name). Writes a one-line
/// summary to `out`; on failure writes an error JSON object
/// {"error", "module", "operation", "message"} to `err` and returns 1.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace hybridsw::cli

#endif  // HYBRIDSW_CLI_HPP_
