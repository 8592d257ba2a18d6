#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aeq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotEquilibrium = 2;

// Runs one `aeq` invocation. `args` excludes the program name. Returns the
// process exit code: 0 success, 1 validation or usage error, 2 when `verify`
// finds a profitable deviation.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aeq
