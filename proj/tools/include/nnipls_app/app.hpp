#pragma once

#include <string>
#include <vector>

namespace nnipls::app {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3, kIo = 4 };

/// Default output directory: $NNIPLS_OUTPUT_DIR, else "nnipls_out".
std::string default_output_dir();

/// Parses the command line and runs one command. Never throws; every outcome
/// is reported through the exit code and the manifest.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace nnipls::app
