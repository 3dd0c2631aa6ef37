#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hk {

/// Entry point behind the hkface binary. Args exclude the program name.
/// Returns the process exit code: 0 success, 2 input error, 3 detection
/// failure, 4 configuration error.
int runCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace hk
