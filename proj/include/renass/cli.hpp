#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace renass::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInvalidModel = 1,
  kIoFailure = 2,
  kBadFlags = 3,
  kOutsideOracleDomain = 4,
  kOracleMismatch = 5,
  kInternalError = 70,
};

/// Runs the command line `args` (args[0] is the program name). Results go
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Replication worker cap from RENASS_THREADS: unset means one per hardware
/// thread, 0 means sequential. Throws std::invalid_argument on garbage.
unsigned thread_limit();

/// Decimal with 9 significant digits, as used in every CSV column.
std::string format_probability(double value);

}  // namespace renass::cli
