#pragma once

namespace pcfeat::cli {

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 1 usage or parameter error, 2 I/O error, 3 computation error.
int run_command(int argc, const char* const* argv);

}  // namespace pcfeat::cli
