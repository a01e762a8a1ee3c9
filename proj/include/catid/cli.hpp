#ifndef CATID_CLI_HPP
#define CATID_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace catid {

inline constexpr const char *kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitValidation = 2,
  kExitWeakInstrument = 3,
  kExitPropertyFailure = 4,
};

/// Runs one CLI invocation; args exclude the program name. JSON goes to
/// out, human-readable messages to err.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

/// SHA-256 of a file's bytes as lowercase hex.
std::string sha256_file(const std::string &path);

} // namespace catid

#endif // CATID_CLI_HPP
