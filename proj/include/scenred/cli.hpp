#pragma once

namespace scenred {

/// Entry point of the command-line tool; returns the process exit code
/// (0 success, 1 validation error, 2 solver failure or limit without result).
int run_cli(int argc, char** argv);

}  // namespace scenred
