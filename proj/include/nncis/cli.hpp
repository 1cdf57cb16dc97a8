#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nncis::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kEmptyCis = 2,
  kCertificateFailure = 3,
};

/// Runs one `nncis` subcommand. args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace nncis::cli
