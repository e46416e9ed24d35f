#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drtk {

// Exit codes: 0 success, 2 input or parse error, 3 precondition or domain
// error, 4 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitInternal = 4;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drtk
