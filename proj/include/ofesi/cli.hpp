#ifndef OFESI_CLI_HPP
#define OFESI_CLI_HPP

#include <iosfwd>
#include <span>
#include <string>

namespace ofesi::cli {

/// Exit codes: 0 success, 1 I/O or data error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (without the program name). Paths given as "-" or
/// omitted read `in` / write `out`.
int run(std::span<const std::string> args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace ofesi::cli

#endif  // OFESI_CLI_HPP
