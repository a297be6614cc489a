#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pmod::cli {

enum ExitCode
{
    ok = 0,
    input_error = 1,
    inconclusive = 2, // only with --strict
};

/// Runs one subcommand; args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

} // namespace pmod::cli
