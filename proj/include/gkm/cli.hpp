#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gkm::cli {

enum ExitCode : int
{
  kOk = 0,
  kUsage = 1,
  kSecrecyFailure = 2,
  kInternal = 3,
};

/// Entry point of the gkmsim tool; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gkm::cli
