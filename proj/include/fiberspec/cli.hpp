#ifndef FIBERSPEC_CLI_HPP
#define FIBERSPEC_CLI_HPP

#include <iosfwd>

namespace fiberspec {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitPass = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitAcceptance = 4,
};

/// Entry point: `fiberspec spectrum|stability|corr CONFIG [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fiberspec

#endif
