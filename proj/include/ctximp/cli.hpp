#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ctximp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitGuard = 4;

std::string_view version();

/// Runs one invocation. `args` excludes the program name. Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctximp::cli
