#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vcsim::cli {

inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

/// Entry point behind the `vcsim` executable; args excludes the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vcsim::cli
