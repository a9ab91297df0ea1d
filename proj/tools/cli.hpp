#pragma once

#include <iosfwd>

namespace gpnd::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

/// Entry point of the gpnd tool: subcommands generate, train, score, eval.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gpnd::cli
