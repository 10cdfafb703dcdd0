#ifndef WSDEP_CLI_H_
#define WSDEP_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace wsdep {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

// Runs one command line (args excludes the program name). Human-readable
// output goes to `out`, diagnostics to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace wsdep

#endif  // WSDEP_CLI_H_
