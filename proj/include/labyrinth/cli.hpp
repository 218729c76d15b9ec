#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lab::cli {

/// Exit-code contract of every subcommand.
inline constexpr int kExitPass = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitFailure = 2;

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace lab::cli
